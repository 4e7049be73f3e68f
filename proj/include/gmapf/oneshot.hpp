#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gmapf/grid_map.hpp"
#include "gmapf/guidance.hpp"
#include "gmapf/pibt.hpp"
#include "gmapf/search.hpp"
#include "gmapf/traffic.hpp"

namespace gmapf {

// Timestep-indexed trajectories, one row per agent, equal horizon.
struct Solution {
  std::vector<std::vector<Vertex>> paths;
  int num_agents() const { return static_cast<int>(paths.size()); }
  int horizon() const { return paths.empty() ? 0 : static_cast<int>(paths[0].size()) - 1; }
};

enum class DefectKind {
  VertexConflict,
  EdgeConflict,
  BadTransition,  // non-adjacent, non-wait move
  WrongStart,
  NotAtGoal,  // terminal rest away from the goal
};

struct Defect {
  DefectKind kind;
  int agent_a = -1;
  int agent_b = -1;
  Vertex where = kNoVertex;
  int t = -1;
};

// Reports every vertex conflict, edge conflict, invalid transition, wrong
// start, and non-goal terminal rest.
inline std::vector<Defect> validate(const Solution& sol, const GridMap& map,
                                    const Scenario& scenario) {
  std::vector<Defect> defects;
  const int k = sol.num_agents();
  const int T = sol.horizon();
  for (int a = 0; a < k; ++a) {
    if (sol.paths[a].empty() || sol.paths[a][0] != scenario.starts[a])
      defects.push_back({DefectKind::WrongStart, a, -1,
                         sol.paths[a].empty() ? kNoVertex : sol.paths[a][0], 0});
    if (!sol.paths[a].empty() && sol.paths[a].back() != scenario.goals[a])
      defects.push_back({DefectKind::NotAtGoal, a, -1, sol.paths[a].back(), T});
    for (int t = 1; t <= T; ++t) {
      const Vertex u = sol.paths[a][t - 1];
      const Vertex v = sol.paths[a][t];
      if (u != v && !map.adjacent(u, v))
        defects.push_back({DefectKind::BadTransition, a, -1, v, t});
    }
  }
  for (int t = 0; t <= T; ++t) {
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) {
        if (sol.paths[a][t] == sol.paths[b][t])
          defects.push_back({DefectKind::VertexConflict, a, b, sol.paths[a][t], t});
        if (t < T && sol.paths[a][t + 1] == sol.paths[b][t] &&
            sol.paths[b][t + 1] == sol.paths[a][t] &&
            sol.paths[a][t] != sol.paths[a][t + 1])
          defects.push_back({DefectKind::EdgeConflict, a, b, sol.paths[a][t], t});
      }
  }
  return defects;
}

// Sum of individual costs: every wait or move before the final uninterrupted
// arrival costs 1.
inline int64_t sic(const Solution& sol, std::span<const Vertex> goals) {
  int64_t total = 0;
  for (int a = 0; a < sol.num_agents(); ++a) {
    const auto& p = sol.paths[a];
    int last_away = -1;
    for (int t = 0; t < static_cast<int>(p.size()); ++t)
      if (p[t] != goals[a]) last_away = t;
    total += last_away + 1;
  }
  return total;
}

struct OneshotConfig {
  bool guided = true;
  CostModel cost_model = CostModel::TwoPart;
  std::optional<FocalRatio> focal;
  int refine_iterations = 100;  // bounded by the setup budget below
  int refine_subset = 10;
  double selector_decay = 0.99;
  double time_limit_s = 60.0;
  double setup_ratio = 0.5;  // share of the budget spent on guide paths
  int step_limit = 0;        // 0 -> (width + height) * 10
  uint64_t seed = 0;
};

struct OneshotResult {
  bool solved = false;
  Solution solution;            // executed trajectory, also on failure
  std::vector<int> unfinished;  // agents not at their goal at the end
};

// Guided PIBT for one-shot MAPF: compute and refine guide paths within the
// setup budget, then step PIBT until every agent rests at its goal. PIBT is
// incomplete here; livelocks surface as a step-limit failure.
inline OneshotResult solve_oneshot(const GridMap& map, const Scenario& scenario,
                                   const OneshotConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto t_begin = clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(clock::now() - t_begin).count();
  };

  const int k = scenario.num_agents();
  DistanceCache cache(map);
  std::vector<std::shared_ptr<const DistanceTable>> goal_dist(k);
  for (int a = 0; a < k; ++a) {
    goal_dist[a] = cache.get(scenario.goals[a]);
    if (!goal_dist[a]->reachable(scenario.starts[a]))
      throw NoPathError("agent " + std::to_string(a) + ": goal unreachable");
  }

  GuidanceSystem guidance(map, k, cfg.cost_model, cfg.focal, cache);
  std::vector<GuideHeuristic> heuristics(k);
  if (cfg.guided) {
    std::vector<int> all(k);
    for (int a = 0; a < k; ++a) all[a] = a;
    guidance.find_paths(all, scenario.starts, scenario.goals);
    RefinementSelector selector;
    selector.decay = cfg.selector_decay;
    selector.subset_size = cfg.refine_subset;
    Rng rng(mix64(cfg.seed ^ 0x5e0d1a2b3c4d5e6fULL));
    const double setup_deadline = cfg.time_limit_s * cfg.setup_ratio;
    for (int it = 0; it < cfg.refine_iterations && elapsed() < setup_deadline; ++it)
      guidance.path_refinement(1, selector, rng, scenario.starts, scenario.goals);
    for (int a = 0; a < k; ++a) heuristics[a].build(map, guidance.path(a));
  }

  std::vector<PibtPrefs> prefs(k);
  for (int a = 0; a < k; ++a) {
    prefs[a].dist = goal_dist[a].get();
    prefs[a].guide = cfg.guided ? &heuristics[a] : nullptr;
  }

  PibtPlanner pibt(map, k);
  std::vector<Vertex> positions = scenario.starts;
  OneshotResult result;
  result.solution.paths.assign(k, {});
  for (int a = 0; a < k; ++a) result.solution.paths[a].push_back(positions[a]);

  const int step_limit =
      cfg.step_limit > 0 ? cfg.step_limit : (map.width() + map.height()) * 10;
  bool done = true;
  for (int a = 0; a < k; ++a) done = done && positions[a] == scenario.goals[a];
  for (int step = 0; step < step_limit && !done; ++step) {
    if (elapsed() > cfg.time_limit_s) break;
    const auto& theta = pibt.plan_step(positions, scenario.goals, prefs);
    positions = theta;
    done = true;
    for (int a = 0; a < k; ++a) {
      result.solution.paths[a].push_back(positions[a]);
      done = done && positions[a] == scenario.goals[a];
    }
  }
  result.solved = done;
  if (!done)
    for (int a = 0; a < k; ++a)
      if (positions[a] != scenario.goals[a]) result.unfinished.push_back(a);
  return result;
}

// Solution file format: one line per agent, `agent_id: v0 v1 ... vT`.
inline void write_solution(const Solution& sol, std::ostream& out) {
  for (int a = 0; a < sol.num_agents(); ++a) {
    out << a << ':';
    for (Vertex v : sol.paths[a]) out << ' ' << v;
    out << '\n';
  }
}

inline Solution parse_solution(std::istream& in) {
  Solution sol;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw detail::parse_error(line_no, "missing ':' in solution line");
    const int agent = std::stoi(line.substr(0, colon));
    if (agent != static_cast<int>(sol.paths.size()))
      throw detail::parse_error(line_no, "agent ids must be dense and ordered");
    std::istringstream rest(line.substr(colon + 1));
    std::vector<Vertex> path;
    Vertex v;
    while (rest >> v) path.push_back(v);
    sol.paths.push_back(std::move(path));
  }
  for (const auto& p : sol.paths)
    if (p.size() != sol.paths[0].size())
      throw ParseError("agents disagree on the horizon length");
  return sol;
}

}  // namespace gmapf
