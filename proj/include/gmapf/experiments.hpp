#pragma once

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gmapf/grid_map.hpp"
#include "gmapf/lifelong.hpp"
#include "gmapf/mapgen.hpp"
#include "gmapf/oneshot.hpp"
#include "gmapf/rng.hpp"

namespace gmapf {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Algorithm label in the usual naming convention, e.g. "PIBT", "GP-R100",
// "GPV-R100-F2", "GP-NO-R100", "GP-SUM-OVC-R100", "GP-R100-Re10-F1.2",
// "SP-R100". Rx = guide-path initializations per step, Rei = refinement
// iterations per step, Fw = focal length bound.
struct AlgSpec {
  std::string label;
  CostModel cost_model = CostModel::TwoPart;
  bool guided = true;
  int init_per_step = INT32_MAX;
  int refine_iterations = 0;
  std::optional<FocalRatio> focal;
};

inline AlgSpec parse_alg_label(const std::string& label) {
  AlgSpec spec;
  spec.label = label;
  std::vector<std::string> tokens;
  std::string token;
  std::istringstream iss(label);
  while (std::getline(iss, token, '-')) tokens.push_back(token);
  if (tokens.empty()) throw ConfigError("empty algorithm label");

  size_t i = 1;
  if (tokens[0] == "PIBT") {
    spec.guided = false;
    spec.cost_model = CostModel::FreeFlow;
    spec.init_per_step = 0;
  } else if (tokens[0] == "SP") {
    spec.cost_model = CostModel::FreeFlow;
  } else if (tokens[0] == "GPV") {
    spec.cost_model = CostModel::VertexOnly;
  } else if (tokens[0] == "GP") {
    spec.cost_model = CostModel::TwoPart;
    if (i < tokens.size() && tokens[i] == "NO") {
      spec.cost_model = CostModel::TwoPartNormalized;
      ++i;
    } else if (i < tokens.size() && tokens[i] == "SUM") {
      ++i;
      if (i < tokens.size() && tokens[i] == "OVC")
        spec.cost_model = CostModel::SumOVC;
      else if (i < tokens.size() && tokens[i] == "NOVC")
        spec.cost_model = CostModel::SumNOVC;
      else
        throw ConfigError("expected OVC or NOVC after SUM in: " + label);
      ++i;
    }
  } else {
    throw ConfigError("unknown algorithm family in label: " + label);
  }

  for (; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    try {
      if (t.rfind("Re", 0) == 0)
        spec.refine_iterations = std::stoi(t.substr(2));
      else if (t.rfind("R", 0) == 0)
        spec.init_per_step = std::stoi(t.substr(1));
      else if (t.rfind("F", 0) == 0)
        spec.focal = FocalRatio::parse(t.substr(1));
      else
        throw ConfigError("unknown label token '" + t + "' in: " + label);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("malformed label token '" + t + "' in: " + label);
    }
  }
  if (!spec.guided && (spec.refine_iterations > 0 || spec.focal))
    throw ConfigError("PIBT takes no guidance suffixes: " + label);
  return spec;
}

enum class RunMode { Oneshot, Lifelong };

// Either a .map file or a generator spec "archetype:WxH:seed".
struct MapSource {
  std::string file;
  std::optional<MapSpec> gen;
  std::string name;  // CSV map column and .scen map field

  static MapSource from_file(const std::string& path) {
    MapSource src;
    src.file = path;
    src.name = std::filesystem::path(path).filename().string();
    return src;
  }

  static MapSource from_gen_string(const std::string& text) {
    MapSource src;
    MapSpec spec;
    const auto first = text.find(':');
    const auto second = text.find(':', first + 1);
    const auto x = text.find('x', first + 1);
    if (first == std::string::npos || second == std::string::npos ||
        x == std::string::npos || x > second)
      throw ConfigError("expected archetype:WxH:seed, got: " + text);
    try {
      spec.archetype = archetype_from_string(text.substr(0, first));
      spec.width = std::stoi(text.substr(first + 1, x - first - 1));
      spec.height = std::stoi(text.substr(x + 1, second - x - 1));
      spec.seed = std::stoull(text.substr(second + 1));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad --gen value: ") + e.what());
    }
    src.gen = spec;
    src.name = std::string(to_string(spec.archetype)) + "-" +
               std::to_string(spec.width) + "x" + std::to_string(spec.height) +
               "-s" + std::to_string(spec.seed);
    return src;
  }

  GridMap build() const {
    if (gen) return generate(*gen);
    return load_map(file);
  }
};

struct RunConfig {
  RunMode mode = RunMode::Lifelong;
  MapSource map;
  std::vector<int> agent_counts;
  std::vector<uint64_t> seeds;
  std::vector<AlgSpec> algs;
  // Optional overrides; flags win over the knobs parsed from labels.
  std::optional<CostModel> cost_model;
  std::optional<FocalRatio> focal_w;
  std::optional<int> init_per_step;
  std::optional<int> refine_iterations;
  int refine_subset = 10;
  int timesteps = 0;           // 0 -> (width + height) * 5
  double step_deadline_s = 10.0;
  double time_limit_s = 60.0;  // one-shot budget
  std::string out_dir;
  int workers = 0;  // 0 -> hardware concurrency; GUIDED_MAPF_THREADS caps
};

struct RunRow {
  std::string map;
  int agents = 0;
  std::string alg;
  uint64_t seed = 0;
  Metrics metrics;           // lifelong
  bool solved = false;       // one-shot
  int64_t sic_value = -1;    // one-shot
  double wall_time_s = 0.0;
  bool timeout = false;
};

inline const char* kLifelongCsvHeader =
    "map,agents,alg,seed,throughput_mean,throughput_std,rt_mean,rt_std,timeout";
inline const char* kOneshotCsvHeader =
    "map,agents,alg,seed,solved,sic,time_s,timeout";

inline std::string format_run_row(RunMode mode, const RunRow& r) {
  char buf[512];
  if (mode == RunMode::Lifelong) {
    std::snprintf(buf, sizeof buf, "%s,%d,%s,%llu,%.6f,%.6f,%.6f,%.6f,%d",
                  r.map.c_str(), r.agents, r.alg.c_str(),
                  static_cast<unsigned long long>(r.seed),
                  r.metrics.throughput_mean, r.metrics.throughput_std,
                  r.metrics.rt_mean, r.metrics.rt_std, r.timeout ? 1 : 0);
  } else {
    std::snprintf(buf, sizeof buf, "%s,%d,%s,%llu,%d,%lld,%.6f,%d",
                  r.map.c_str(), r.agents, r.alg.c_str(),
                  static_cast<unsigned long long>(r.seed), r.solved ? 1 : 0,
                  static_cast<long long>(r.sic_value), r.wall_time_s,
                  r.timeout ? 1 : 0);
  }
  return buf;
}

inline uint64_t scenario_seed(uint64_t run_seed, int agents) {
  return mix64(run_seed ^ (static_cast<uint64_t>(agents) << 32));
}

inline LifelongConfig lifelong_config_for(const RunConfig& cfg, const AlgSpec& alg,
                                          const GridMap& map, uint64_t seed) {
  LifelongConfig lc;
  lc.cost_model = cfg.cost_model.value_or(alg.cost_model);
  lc.focal = cfg.focal_w ? cfg.focal_w : alg.focal;
  lc.init_per_step = cfg.init_per_step.value_or(alg.init_per_step);
  lc.refine_iterations = cfg.refine_iterations.value_or(alg.refine_iterations);
  lc.refine_subset = cfg.refine_subset;
  lc.max_timesteps =
      cfg.timesteps > 0 ? cfg.timesteps : (map.width() + map.height()) * 5;
  lc.step_deadline_s = cfg.step_deadline_s;
  lc.seed = seed;
  return lc;
}

inline RunRow execute_run(const RunConfig& cfg, const GridMap& map,
                          const AlgSpec& alg, int agents, uint64_t seed) {
  RunRow row;
  row.map = cfg.map.name;
  row.agents = agents;
  row.alg = alg.label;
  row.seed = seed;
  const Scenario scen = generate_scenario(map, agents, scenario_seed(seed, agents));
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.mode == RunMode::Lifelong) {
    row.metrics = run_lifelong(map, scen, lifelong_config_for(cfg, alg, map, seed));
    row.timeout = row.metrics.timeout;
  } else {
    OneshotConfig oc;
    oc.guided = alg.guided;
    oc.cost_model = cfg.cost_model.value_or(alg.cost_model);
    oc.focal = cfg.focal_w ? cfg.focal_w : alg.focal;
    oc.refine_iterations = cfg.refine_iterations.value_or(
        alg.refine_iterations > 0 ? alg.refine_iterations : 100);
    oc.refine_subset = cfg.refine_subset;
    oc.time_limit_s = cfg.time_limit_s;
    oc.seed = seed;
    const OneshotResult result = solve_oneshot(map, scen, oc);
    row.solved = result.solved;
    if (result.solved) row.sic_value = sic(result.solution, scen.goals);
    row.timeout = !result.solved;
  }
  row.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

inline int resolve_workers(int requested, size_t tasks) {
  int workers = requested > 0
                    ? requested
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (const char* env = std::getenv("GUIDED_MAPF_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1 && cap < workers) workers = cap;
  }
  return std::min<int>(workers, static_cast<int>(tasks));
}

struct BatchResult {
  std::vector<RunRow> rows;
  bool any_timeout = false;
};

// Per-run aggregates written once per algorithm / agent-count cell,
// mirroring the Throughput and R-Time summary layout.
inline void write_summary(const RunConfig& cfg, const std::vector<RunRow>& rows,
                          std::ostream& out) {
  out << (cfg.mode == RunMode::Lifelong
              ? "map,agents,alg,runs,throughput_mean,throughput_std,rt_mean,rt_std,timeouts"
              : "map,agents,alg,runs,solved,sic_mean,time_mean_s,timeouts")
      << '\n';
  std::map<std::pair<std::string, int>, std::vector<const RunRow*>> cells;
  for (const auto& r : rows) cells[{r.alg, r.agents}].push_back(&r);
  for (const auto& [key, cell] : cells) {
    const auto& [alg, agents] = key;
    const double n = static_cast<double>(cell.size());
    char buf[512];
    if (cfg.mode == RunMode::Lifelong) {
      double mean = 0, rt = 0;
      int timeouts = 0;
      for (const RunRow* r : cell) {
        mean += r->metrics.throughput_mean;
        rt += r->metrics.rt_mean;
        timeouts += r->timeout;
      }
      mean /= n;
      rt /= n;
      double var = 0, rt_var = 0;
      for (const RunRow* r : cell) {
        var += (r->metrics.throughput_mean - mean) * (r->metrics.throughput_mean - mean);
        rt_var += (r->metrics.rt_mean - rt) * (r->metrics.rt_mean - rt);
      }
      std::snprintf(buf, sizeof buf, "%s,%d,%s,%zu,%.6f,%.6f,%.6f,%.6f,%d",
                    cfg.map.name.c_str(), agents, alg.c_str(), cell.size(), mean,
                    std::sqrt(var / n), rt, std::sqrt(rt_var / n), timeouts);
    } else {
      int solved = 0, timeouts = 0;
      double sic_sum = 0, time_sum = 0;
      for (const RunRow* r : cell) {
        solved += r->solved;
        timeouts += r->timeout;
        time_sum += r->wall_time_s;
        if (r->solved) sic_sum += static_cast<double>(r->sic_value);
      }
      std::snprintf(buf, sizeof buf, "%s,%d,%s,%zu,%d,%.2f,%.6f,%d",
                    cfg.map.name.c_str(), agents, alg.c_str(), cell.size(), solved,
                    solved ? sic_sum / solved : -1.0, time_sum / n, timeouts);
    }
    out << buf << '\n';
  }
}

// Plot-ready series: per algorithm `agents,throughput_mean,throughput_std`,
// and per (algorithm, agent count) `t,rt_mean,rt_std`.
inline void emit_plot_data(const RunConfig& cfg, const std::vector<RunRow>& rows,
                           const std::string& dir) {
  if (cfg.mode != RunMode::Lifelong) return;
  namespace fs = std::filesystem;
  std::map<std::string, std::map<int, std::vector<const RunRow*>>> by_alg;
  for (const auto& r : rows) by_alg[r.alg][r.agents].push_back(&r);
  for (const auto& [alg, by_agents] : by_alg) {
    std::ofstream tp(fs::path(dir) / ("plot_throughput_" + alg + ".csv"));
    tp << "agents,throughput_mean,throughput_std\n";
    for (const auto& [agents, cell] : by_agents) {
      double mean = 0;
      for (const RunRow* r : cell) mean += r->metrics.throughput_mean;
      mean /= cell.size();
      double var = 0;
      for (const RunRow* r : cell)
        var += (r->metrics.throughput_mean - mean) * (r->metrics.throughput_mean - mean);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", agents, mean,
                    std::sqrt(var / cell.size()));
      tp << buf;
    }
    for (const auto& [agents, cell] : by_agents) {
      std::ofstream rt(fs::path(dir) / ("plot_rt_" + alg + "_" +
                                        std::to_string(agents) + ".csv"));
      rt << "t,rt_mean,rt_std\n";
      size_t horizon = 0;
      for (const RunRow* r : cell)
        horizon = std::max(horizon, r->metrics.steps.size());
      for (size_t t = 0; t < horizon; ++t) {
        double mean = 0;
        int n = 0;
        for (const RunRow* r : cell)
          if (t < r->metrics.steps.size()) {
            mean += r->metrics.steps[t].response_time_s;
            ++n;
          }
        mean /= n;
        double var = 0;
        for (const RunRow* r : cell)
          if (t < r->metrics.steps.size()) {
            const double d = r->metrics.steps[t].response_time_s - mean;
            var += d * d;
          }
        char buf[160];
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", t, mean,
                      std::sqrt(var / n));
        rt << buf;
      }
    }
  }
}

inline void validate_config(const RunConfig& cfg) {
  if (cfg.map.file.empty() && !cfg.map.gen)
    throw ConfigError("no map given: use --map or --gen");
  if (!cfg.map.file.empty() && !std::ifstream(cfg.map.file))
    throw ConfigError("map file does not exist: " + cfg.map.file);
  if (cfg.agent_counts.empty()) throw ConfigError("no agent counts given");
  for (int a : cfg.agent_counts)
    if (a < 1) throw ConfigError("agent counts must be >= 1");
  if (cfg.seeds.empty()) throw ConfigError("no seeds given");
  if (cfg.algs.empty()) throw ConfigError("no algorithms given");
  if (cfg.refine_subset < 1) throw ConfigError("--refine-subset must be >= 1");
  if (cfg.timesteps < 0 || cfg.step_deadline_s <= 0 || cfg.time_limit_s <= 0)
    throw ConfigError("time limits must be positive");
  if (cfg.out_dir.empty()) throw ConfigError("no output directory given");
}

// Runs the full (alg x agents x seed) grid. Rows are appended to runs.csv
// incrementally in task order (crash-safe); per-run event logs, the summary
// table and plot series land next to it.
inline BatchResult run_batch(const RunConfig& cfg) {
  validate_config(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const GridMap map = cfg.map.build();
  for (int a : cfg.agent_counts)
    if (a > map.num_traversable())
      throw ConfigError("agent count " + std::to_string(a) +
                        " exceeds traversable cells");

  struct Task {
    const AlgSpec* alg;
    int agents;
    uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const AlgSpec& alg : cfg.algs)
    for (int agents : cfg.agent_counts)
      for (uint64_t seed : cfg.seeds) tasks.push_back({&alg, agents, seed});

  BatchResult batch;
  batch.rows.resize(tasks.size());
  std::vector<uint8_t> ready(tasks.size(), 0);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<size_t> next{0};

  const int workers = resolve_workers(cfg.workers, tasks.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        RunRow row;
        try {
          row = execute_run(cfg, map, *tasks[i].alg, tasks[i].agents,
                            tasks[i].seed);
        } catch (const std::exception& e) {
          // A broken run must not wedge the writer; flag it and move on.
          row.map = cfg.map.name;
          row.agents = tasks[i].agents;
          row.alg = tasks[i].alg->label;
          row.seed = tasks[i].seed;
          row.timeout = true;
          std::fprintf(stderr, "run %s/%d/%llu failed: %s\n", row.alg.c_str(),
                       row.agents, static_cast<unsigned long long>(row.seed),
                       e.what());
        }
        std::lock_guard lock(mu);
        batch.rows[i] = std::move(row);
        ready[i] = 1;
        cv.notify_all();
      }
    });

  const std::string runs_path =
      (fs::path(cfg.out_dir) /
       (cfg.mode == RunMode::Lifelong ? "runs.csv" : "runs_oneshot.csv"))
          .string();
  std::ofstream runs(runs_path, std::ios::trunc);
  runs << (cfg.mode == RunMode::Lifelong ? kLifelongCsvHeader : kOneshotCsvHeader)
       << '\n'
       << std::flush;
  {
    std::unique_lock lock(mu);
    for (size_t i = 0; i < tasks.size(); ++i) {
      cv.wait(lock, [&] { return ready[i] != 0; });
      const RunRow& row = batch.rows[i];
      runs << format_run_row(cfg.mode, row) << '\n' << std::flush;
      batch.any_timeout = batch.any_timeout || row.timeout;
      if (cfg.mode == RunMode::Lifelong) {
        std::ofstream ev(fs::path(cfg.out_dir) /
                         ("events_" + row.alg + "_" + std::to_string(row.agents) +
                          "_" + std::to_string(row.seed) + ".jsonl"));
        write_event_log(row.metrics, ev);
      }
    }
  }
  for (auto& t : pool) t.join();

  std::ofstream summary(fs::path(cfg.out_dir) / "summary.csv");
  write_summary(cfg, batch.rows, summary);
  emit_plot_data(cfg, batch.rows, cfg.out_dir);
  return batch;
}

}  // namespace gmapf
