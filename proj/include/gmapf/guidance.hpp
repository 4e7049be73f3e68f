#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gmapf/grid_map.hpp"
#include "gmapf/rng.hpp"
#include "gmapf/search.hpp"
#include "gmapf/traffic.hpp"

namespace gmapf {

// Builds free-flow distance tables rooted at goals on demand and shares
// them between agents heading to the same goal.
class DistanceCache {
 public:
  explicit DistanceCache(const GridMap& map) : map_(&map) {}

  std::shared_ptr<const DistanceTable> get(Vertex goal) {
    auto it = tables_.find(goal);
    if (it != tables_.end()) return it->second;
    auto table = std::make_shared<const DistanceTable>(bfs_distances(*map_, goal));
    tables_.emplace(goal, table);
    return table;
  }

  // Drops tables no longer referenced elsewhere once the cache grows past
  // `keep` entries.
  void trim(size_t keep) {
    if (tables_.size() <= keep) return;
    for (auto it = tables_.begin(); it != tables_.end();) {
      if (it->second.use_count() == 1)
        it = tables_.erase(it);
      else
        ++it;
    }
  }

  size_t size() const { return tables_.size(); }

 private:
  const GridMap* map_;
  std::unordered_map<Vertex, std::shared_ptr<const DistanceTable>> tables_;
};

// Time-independent congestion-aware route for one agent.
struct GuidePath {
  int agent = -1;
  std::vector<Vertex> vertices;
};

// Per-agent heuristic h(v) = (dp, dg): dp is the free-flow distance from v
// to the nearest guide-path vertex, dg the remaining on-path distance to the
// goal from that vertex (ties resolved toward smaller dg). Backed by a lazy
// multi-source backward BFS that pauses as soon as the queried vertex is
// cached and resumes on later queries; cached values never change.
class GuideHeuristic {
 public:
  GuideHeuristic() = default;

  void build(const GridMap& map, std::span<const Vertex> path) {
    map_ = &map;
    if (dp_.size() != static_cast<size_t>(map.size())) {
      dp_.assign(map.size(), 0);
      dg_.assign(map.size(), 0);
      stamp_.assign(map.size(), 0);
      epoch_ = 0;
    }
    ++epoch_;
    queue_.clear();
    head_ = 0;
    // Roots pushed in increasing dg so that within every BFS layer the
    // queue stays sorted by dg; the first visit therefore wins the
    // min-dp-then-min-dg tie-break.
    const int last = static_cast<int>(path.size()) - 1;
    for (int j = last; j >= 0; --j) {
      const Vertex v = path[j];
      stamp_[v] = epoch_;
      dp_[v] = 0;
      dg_[v] = last - j;
      queue_.push_back(v);
    }
    built_ = !path.empty();
  }

  bool built() const { return built_; }

  // (dp, dg); (kUnreachable, kUnreachable) when v cannot reach the path.
  std::pair<int32_t, int32_t> query(Vertex v) {
    while (stamp_[v] != epoch_ && head_ < queue_.size()) {
      const Vertex u = queue_[head_++];
      const int32_t ndp = dp_[u] + 1;
      const int32_t ndg = dg_[u];
      for (Vertex nb : map_->neighbors(u)) {
        if (stamp_[nb] == epoch_) continue;
        stamp_[nb] = epoch_;
        dp_[nb] = ndp;
        dg_[nb] = ndg;
        queue_.push_back(nb);
      }
    }
    if (stamp_[v] != epoch_) return {kUnreachable, kUnreachable};
    return {dp_[v], dg_[v]};
  }

 private:
  const GridMap* map_ = nullptr;
  bool built_ = false;
  std::vector<int32_t> dp_, dg_;
  std::vector<uint32_t> stamp_;
  uint32_t epoch_ = 0;
  std::vector<Vertex> queue_;
  size_t head_ = 0;
};

// Adaptive selection between the two replan-subset methods. Weights follow
// w <- decay*w + (1-decay)*max(0, cost decrease).
struct RefinementSelector {
  enum Method { kRandomSubset = 0, kCongestionIntersecting = 1 };

  double weights[2] = {1.0, 1.0};
  double decay = 0.99;
  int subset_size = 10;

  int pick(Rng& rng) const {
    const double total = weights[0] + weights[1];
    return rng.next_double() * total < weights[0] ? kRandomSubset
                                                  : kCongestionIntersecting;
  }

  void reward(int method, double cost_decrease) {
    weights[method] = decay * weights[method] +
                      (1.0 - decay) * std::max(0.0, cost_decrease);
  }
};

// Owns the guide paths of all agents plus the flow map they induce, and
// runs the sequential planning / replanning / refinement loop. Planning is
// strictly sequential: each path is registered in the flows before the next
// agent plans, so later agents see all available traffic information.
class GuidanceSystem {
 public:
  GuidanceSystem(const GridMap& map, int num_agents, CostModel model,
                 std::optional<FocalRatio> focal, DistanceCache& dist_cache)
      : map_(&map),
        model_(model),
        focal_(focal),
        flows_(map),
        dist_cache_(&dist_cache),
        engine_(map),
        paths_(num_agents),
        mark_(map.size(), 0) {}

  int num_agents() const { return static_cast<int>(paths_.size()); }
  CostModel model() const { return model_; }
  const FlowMap& flows() const { return flows_; }
  bool initialized(int agent) const { return !paths_[agent].empty(); }
  const std::vector<Vertex>& path(int agent) const { return paths_[agent]; }

  int num_initialized() const {
    int n = 0;
    for (const auto& p : paths_) n += !p.empty();
    return n;
  }

  bool all_initialized() const { return num_initialized() == num_agents(); }

  // Plans the listed agents one by one in ascending id order, registering
  // each path before the next agent plans. Agents must not hold paths yet.
  void find_paths(std::span<const int> agents, std::span<const Vertex> starts,
                  std::span<const Vertex> goals) {
    for (int a : agents) {
      if (!paths_[a].empty())
        throw std::logic_error("find_paths on an already-initialized agent");
      plan_one(a, starts[a], goals[a]);
    }
  }

  // Removes all the subset's paths from the flows first, then replans them
  // sequentially. Replacement is unconditional. `subset` must be sorted.
  void replan(std::span<const int> subset, std::span<const Vertex> starts,
              std::span<const Vertex> goals) {
    for (int a : subset) {
      flows_.remove_path(paths_[a]);
      paths_[a].clear();
    }
    for (int a : subset) plan_one(a, starts[a], goals[a]);
  }

  // One adaptive-LNS round per iteration: pick a method by weight, replan
  // the subset it selects, and reward the method with the decrease in total
  // scalarized cost. Returns the ids whose path content changed.
  std::vector<int> path_refinement(int iterations, RefinementSelector& selector,
                                   Rng& rng, std::span<const Vertex> starts,
                                   std::span<const Vertex> goals) {
    std::unordered_map<int, std::vector<Vertex>> before;
    int64_t cost = total_scalar_cost();
    for (int it = 0; it < iterations; ++it) {
      const int method = selector.pick(rng);
      const std::vector<int> subset =
          method == RefinementSelector::kRandomSubset
              ? random_subset(selector.subset_size, rng)
              : congestion_intersecting_subset(selector.subset_size, rng);
      for (int a : subset) before.try_emplace(a, paths_[a]);
      replan(subset, starts, goals);
      const int64_t after = total_scalar_cost();
      selector.reward(method, static_cast<double>(cost - after));
      cost = after;
    }
    std::vector<int> changed;
    for (const auto& [a, old] : before)
      if (paths_[a] != old) changed.push_back(a);
    std::sort(changed.begin(), changed.end());
    return changed;
  }

  // Seed = agent with the costliest guide path (ties to the lower id), then
  // agents whose paths intersect the seed's, ascending, truncated to `size`
  // and padded with random agents when too few intersect.
  std::vector<int> congestion_intersecting_subset(int size, Rng& rng) {
    const int k = num_agents();
    if (size >= k) {
      std::vector<int> all(k);
      for (int i = 0; i < k; ++i) all[i] = i;
      return all;
    }
    int seed_agent = 0;
    int64_t best = -1;
    for (int a = 0; a < k; ++a) {
      const int64_t c = scalar_path_cost(a);
      if (c > best) {
        best = c;
        seed_agent = a;
      }
    }
    ++mark_epoch_;
    for (Vertex v : paths_[seed_agent]) mark_[v] = mark_epoch_;
    std::vector<int> subset{seed_agent};
    std::vector<uint8_t> in_subset(k, 0);
    in_subset[seed_agent] = 1;
    for (int a = 0; a < k && static_cast<int>(subset.size()) < size; ++a) {
      if (in_subset[a]) continue;
      for (Vertex v : paths_[a])
        if (mark_[v] == mark_epoch_) {
          subset.push_back(a);
          in_subset[a] = 1;
          break;
        }
    }
    while (static_cast<int>(subset.size()) < size) {
      std::vector<int> rest;
      for (int a = 0; a < k; ++a)
        if (!in_subset[a]) rest.push_back(a);
      const int a = rest[rng.bounded(rest.size())];
      subset.push_back(a);
      in_subset[a] = 1;
    }
    std::sort(subset.begin(), subset.end());
    return subset;
  }

  // Sum of the weighted-distance components along the agent's path under
  // the current flows. Contraflow components are excluded: they are
  // products and do not share units with travel time.
  int64_t scalar_path_cost(int agent) const {
    const auto& p = paths_[agent];
    int64_t cost = 0;
    for (size_t i = 1; i < p.size(); ++i)
      cost += edge_weight(model_, flows_, p[i - 1], p[i]).distance;
    return cost;
  }

  int64_t total_scalar_cost() const {
    int64_t total = 0;
    for (int a = 0; a < num_agents(); ++a) total += scalar_path_cost(a);
    return total;
  }

  // Flow map rebuilt from scratch from the registered paths; must always
  // equal the incrementally maintained one.
  FlowMap rebuild_flows() const {
    FlowMap fresh(*map_);
    for (const auto& p : paths_) fresh.add_path(p);
    return fresh;
  }

  // One line per agent: `agent_id: v0 v1 ... vn`.
  void dump_paths(std::ostream& out) const {
    for (int a = 0; a < num_agents(); ++a) {
      out << a << ':';
      for (Vertex v : paths_[a]) out << ' ' << v;
      out << '\n';
    }
  }

 private:
  void plan_one(int agent, Vertex start, Vertex goal) {
    const auto goal_dist = dist_cache_->get(goal);
    std::vector<Vertex> path;
    try {
      path = engine_.plan(flows_, model_, *goal_dist, start, goal, focal_);
    } catch (const NoPathError& e) {
      throw NoPathError("agent " + std::to_string(agent) + ": " + e.what());
    }
    flows_.add_path(path);
    paths_[agent] = std::move(path);
  }

  std::vector<int> random_subset(int size, Rng& rng) {
    const int k = num_agents();
    std::vector<int> subset;
    if (size >= k) {
      subset.resize(k);
      for (int i = 0; i < k; ++i) subset[i] = i;
      return subset;
    }
    for (uint32_t idx : rng.sample_distinct(size, k))
      subset.push_back(static_cast<int>(idx));
    std::sort(subset.begin(), subset.end());
    return subset;
  }

  const GridMap* map_;
  CostModel model_;
  std::optional<FocalRatio> focal_;
  FlowMap flows_;
  DistanceCache* dist_cache_;
  SearchEngine engine_;
  std::vector<std::vector<Vertex>> paths_;
  std::vector<uint32_t> mark_;
  uint32_t mark_epoch_ = 0;
};

}  // namespace gmapf
