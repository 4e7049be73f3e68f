#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gmapf/grid_map.hpp"
#include "gmapf/guidance.hpp"
#include "gmapf/pibt.hpp"
#include "gmapf/rng.hpp"
#include "gmapf/search.hpp"
#include "gmapf/traffic.hpp"

namespace gmapf {

struct LifelongConfig {
  // Guide-path initializations per timestep (Rx). 0 disables guidance
  // entirely; INT32_MAX initializes everyone on the first step.
  int init_per_step = 100;
  int refine_iterations = 0;  // Rei: adaptive-LNS rounds per timestep
  int refine_subset = 10;     // agents replanned per round
  std::optional<FocalRatio> focal;
  CostModel cost_model = CostModel::TwoPart;
  double selector_decay = 0.99;
  int max_timesteps = 100;
  double step_deadline_s = 10.0;  // planner must answer within this budget
  uint64_t seed = 0;
  bool shuffle_priorities = false;
};

struct StepRecord {
  int t = 0;
  double response_time_s = 0.0;
  int tasks_finished = 0;
  int64_t cumulative_tasks = 0;
  int initialized_agents = 0;
  int refined_paths = 0;
};

struct Metrics {
  std::vector<StepRecord> steps;
  bool timeout = false;
  int conflicts = 0;  // validator runs every step; stays 0 by construction
  int64_t total_tasks = 0;
  double throughput_mean = 0.0, throughput_std = 0.0;
  double rt_mean = 0.0, rt_std = 0.0;

  void finalize() {
    total_tasks = 0;
    double rt_sum = 0;
    for (const auto& s : steps) {
      total_tasks += s.tasks_finished;
      rt_sum += s.response_time_s;
    }
    const double n = steps.empty() ? 1.0 : static_cast<double>(steps.size());
    throughput_mean = static_cast<double>(total_tasks) / n;
    rt_mean = rt_sum / n;
    double tv = 0, rv = 0;
    for (const auto& s : steps) {
      tv += (s.tasks_finished - throughput_mean) * (s.tasks_finished - throughput_mean);
      rv += (s.response_time_s - rt_mean) * (s.response_time_s - rt_mean);
    }
    throughput_std = std::sqrt(tv / n);
    rt_std = std::sqrt(rv / n);
  }
};

// Draws new goals uniformly over the traversable component of the starts,
// excluding the agent's current cell. Reproducible from its seed; the
// planner only ever sees the current goal of each agent.
class TaskAssigner {
 public:
  TaskAssigner(std::vector<Vertex> pool, uint64_t seed)
      : pool_(std::move(pool)), rng_(seed) {
    if (pool_.empty()) throw std::invalid_argument("empty goal pool");
  }

  Vertex draw(Vertex exclude) {
    if (pool_.size() == 1) return pool_[0];
    Vertex v = pool_[rng_.bounded(pool_.size())];
    while (v == exclude) v = pool_[rng_.bounded(pool_.size())];
    return v;
  }

 private:
  std::vector<Vertex> pool_;
  Rng rng_;
};

// Online lifelong loop: lazily initialize guide paths, replan agents whose
// task changed, refine, then take one guided PIBT step. Response time is
// measured strictly around guided_plan_step.
class LifelongSim {
 public:
  LifelongSim(const GridMap& map, const Scenario& scenario,
              const LifelongConfig& config)
      : map_(&map),
        cfg_(config),
        dist_cache_(map),
        guidance_(map, scenario.num_agents(), config.cost_model, config.focal,
                  dist_cache_),
        pibt_(map, scenario.num_agents()),
        positions_(scenario.starts),
        goals_(scenario.goals),
        heuristics_(scenario.num_agents()),
        goal_changed_(scenario.num_agents(), 0),
        goal_dist_(scenario.num_agents()),
        prefs_(scenario.num_agents()),
        refine_rng_(mix64(config.seed ^ 0x5e0d1a2b3c4d5e6fULL)),
        assigner_(reachable_pool(map, scenario), mix64(config.seed)) {
    const int k = scenario.num_agents();
    validate_scenario(map, scenario);
    selector_.decay = config.selector_decay;
    selector_.subset_size = config.refine_subset;
    for (int a = 0; a < k; ++a) {
      lazy_queue_.push_back(a);
      goal_dist_[a] = dist_cache_.get(goals_[a]);
    }
    if (config.shuffle_priorities) {
      Rng r(mix64(config.seed ^ 0x9d7c6b5a49382716ULL));
      pibt_.shuffle_ranks(r);
    }
  }

  int num_agents() const { return static_cast<int>(positions_.size()); }
  const std::vector<Vertex>& positions() const { return positions_; }
  const std::vector<Vertex>& goals() const { return goals_; }
  const GuidanceSystem& guidance() const { return guidance_; }
  int last_refined_paths() const { return refined_this_step_; }

  // The four phases of one planning call: Initialising, Updating, Refining,
  // then PIBT with guide heuristics.
  const std::vector<Vertex>& guided_plan_step() {
    refined_this_step_ = 0;
    const int k = num_agents();

    // Initialising: at most init_per_step new guide paths, from current
    // positions. Agents still without paths keep following free-flow PIBT.
    if (!lazy_queue_.empty() && cfg_.init_per_step > 0) {
      std::vector<int> batch;
      for (int i = 0; i < cfg_.init_per_step && !lazy_queue_.empty(); ++i) {
        batch.push_back(lazy_queue_.front());
        lazy_queue_.pop_front();
      }
      guidance_.find_paths(batch, positions_, goals_);
      for (int a : batch) {
        heuristics_[a].build(*map_, guidance_.path(a));
        goal_changed_[a] = 0;
      }
    }

    // Updating: agents whose task changed replan from where they stand.
    for (int a = 0; a < k; ++a) {
      if (!goal_changed_[a] || !guidance_.initialized(a)) continue;
      const int singleton[1] = {a};
      guidance_.replan(singleton, positions_, goals_);
      heuristics_[a].build(*map_, guidance_.path(a));
      goal_changed_[a] = 0;
    }

    // Refining: adaptive-LNS rounds once everyone has a guide path.
    if (cfg_.refine_iterations > 0 && lazy_queue_.empty() &&
        guidance_.all_initialized()) {
      const auto changed = guidance_.path_refinement(
          cfg_.refine_iterations, selector_, refine_rng_, positions_, goals_);
      for (int a : changed) heuristics_[a].build(*map_, guidance_.path(a));
      refined_this_step_ = static_cast<int>(changed.size());
    }

    for (int a = 0; a < k; ++a) {
      prefs_[a].dist = goal_dist_[a].get();
      prefs_[a].guide = guidance_.initialized(a) ? &heuristics_[a] : nullptr;
    }
    return pibt_.plan_step(positions_, goals_, prefs_);
  }

  // Executes a validated joint move, counts arrivals and hands out new
  // tasks. An agent whose fresh goal equals its cell finishes at the next
  // arrival check.
  int execute_and_assign(const std::vector<Vertex>& theta) {
    const int k = num_agents();
    int finished = 0;
    for (int a = 0; a < k; ++a) positions_[a] = theta[a];
    for (int a = 0; a < k; ++a) {
      if (positions_[a] != goals_[a]) continue;
      ++finished;
      goals_[a] = assigner_.draw(positions_[a]);
      goal_dist_[a] = dist_cache_.get(goals_[a]);
      goal_changed_[a] = 1;
    }
    cumulative_tasks_ += finished;
    dist_cache_.trim(static_cast<size_t>(2 * k + 16));
    return finished;
  }

  Metrics run() {
    Metrics m;
    using clock = std::chrono::steady_clock;
    for (int t = 0; t < cfg_.max_timesteps; ++t) {
      const auto t0 = clock::now();
      const std::vector<Vertex>& theta = guided_plan_step();
      const double rt = std::chrono::duration<double>(clock::now() - t0).count();
      if (rt > cfg_.step_deadline_s) {
        m.timeout = true;
        m.steps.push_back({t, rt, 0, cumulative_tasks_,
                           guidance_.num_initialized(), refined_this_step_});
        break;
      }
      m.conflicts += count_step_conflicts(*map_, positions_, theta);
      const int finished = execute_and_assign(theta);
      m.steps.push_back({t, rt, finished, cumulative_tasks_,
                         guidance_.num_initialized(), refined_this_step_});
    }
    m.finalize();
    return m;
  }

 private:
  static std::vector<Vertex> reachable_pool(const GridMap& map,
                                            const Scenario& scenario) {
    if (scenario.num_agents() == 0)
      throw std::invalid_argument("scenario has no agents");
    const DistanceTable d = bfs_distances(map, scenario.starts[0]);
    std::vector<Vertex> pool;
    for (Vertex v = 0; v < map.size(); ++v)
      if (map.traversable(v) && d.reachable(v)) pool.push_back(v);
    return pool;
  }

  static void validate_scenario(const GridMap& map, const Scenario& scenario) {
    const DistanceTable d = bfs_distances(map, scenario.starts[0]);
    for (int a = 0; a < scenario.num_agents(); ++a) {
      if (!map.traversable(scenario.starts[a]) ||
          !map.traversable(scenario.goals[a]))
        throw std::invalid_argument("agent " + std::to_string(a) +
                                    ": start/goal not traversable");
      if (!d.reachable(scenario.starts[a]) || !d.reachable(scenario.goals[a]))
        throw std::invalid_argument("agent " + std::to_string(a) +
                                    ": start/goal outside the common component");
    }
  }

  const GridMap* map_;
  LifelongConfig cfg_;
  DistanceCache dist_cache_;
  GuidanceSystem guidance_;
  PibtPlanner pibt_;
  std::vector<Vertex> positions_, goals_;
  std::vector<GuideHeuristic> heuristics_;
  std::vector<uint8_t> goal_changed_;
  std::vector<std::shared_ptr<const DistanceTable>> goal_dist_;
  std::vector<PibtPrefs> prefs_;
  std::deque<int> lazy_queue_;
  RefinementSelector selector_;
  Rng refine_rng_;
  TaskAssigner assigner_;
  int64_t cumulative_tasks_ = 0;
  int refined_this_step_ = 0;
};

inline Metrics run_lifelong(const GridMap& map, const Scenario& scenario,
                            const LifelongConfig& config) {
  LifelongSim sim(map, scenario, config);
  return sim.run();
}

// One JSON record per timestep, fixed key order and formatting so that
// seeded reruns are byte-identical outside the timing field.
inline void write_event_log(const Metrics& m, std::ostream& out) {
  char buf[256];
  for (const auto& s : m.steps) {
    std::snprintf(buf, sizeof buf,
                  "{\"t\":%d,\"response_time_s\":%.6f,\"tasks_finished\":%d,"
                  "\"cumulative_tasks\":%lld,\"initialized_agents\":%d,"
                  "\"refined_paths\":%d}\n",
                  s.t, s.response_time_s, s.tasks_finished,
                  static_cast<long long>(s.cumulative_tasks),
                  s.initialized_agents, s.refined_paths);
    out << buf;
  }
}

}  // namespace gmapf
