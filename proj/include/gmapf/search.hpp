#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmapf/grid_map.hpp"
#include "gmapf/traffic.hpp"

namespace gmapf {

struct NoPathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Suboptimality factor w = num/den >= 1, kept rational so that bound checks
// like `len <= w * C*` are exact integer comparisons on every platform.
struct FocalRatio {
  int32_t num = 1;
  int32_t den = 1;

  double value() const { return static_cast<double>(num) / den; }

  // Parses "1", "2", "1.2", "1.25" into an exact rational.
  static FocalRatio parse(const std::string& text) {
    const auto dot = text.find('.');
    const std::string whole = dot == std::string::npos ? text : text.substr(0, dot);
    const std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
    if (whole.empty() || frac.size() > 6 ||
        whole.find_first_not_of("0123456789") != std::string::npos ||
        frac.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad suboptimality factor: " + text);
    FocalRatio r;
    r.den = 1;
    for (size_t i = 0; i < frac.size(); ++i) r.den *= 10;
    r.num = static_cast<int32_t>(std::stol(whole) * r.den +
                                 (frac.empty() ? 0 : std::stol(frac)));
    if (r.num < r.den) throw std::invalid_argument("suboptimality factor must be >= 1");
    return r;
  }
};

// True iff the path's move count is within w * dist_freeflow(start, goal).
inline bool verify_bound(std::span<const Vertex> path, Vertex start, Vertex goal,
                         const GridMap& map, FocalRatio w) {
  const DistanceTable d = bfs_distances(map, goal);
  if (!d.reachable(start)) return false;
  const int64_t moves = static_cast<int64_t>(path.size()) - 1;
  return moves * w.den <= static_cast<int64_t>(w.num) * d[start];
}

// Single-agent planner over congestion-aware edge weights. Guide paths
// deliberately ignore other agents' timing, so there is no collision
// checking here.
//
// Pure mode (no focal bound): minimizes (contraflow, weighted distance)
// lexicographically, then move count. The heuristic (0, dist_freeflow) is
// admissible and consistent for the second component because every edge's
// second component is >= 1.
//
// Focal mode: OPEN is ordered by f_len = g_len + dist_freeflow(v, goal) and
// FOCAL holds nodes with f_len <= w * f_len_min, ordered by the two-part
// f-cost. Labels are re-queued when a route improves either the
// lexicographic g or the move count (the contraflow component makes the
// search non-monotone under the length-ordered OPEN). Nothing beyond
// floor(w * C*) is ever generated, so the returned move count always
// satisfies the bound.
//
// One engine instance reuses its scratch arrays across calls; individual
// calls are side-effect free with respect to the flow map.
class SearchEngine {
 public:
  explicit SearchEngine(const GridMap& map)
      : map_(&map),
        g1_(map.size()),
        g2_(map.size()),
        glen_(map.size()),
        parent_(map.size()),
        settled_(map.size(), 0),
        stamp_(map.size(), 0),
        env_len_(map.size()),
        env_g1_(map.size()),
        env_g2_(map.size()),
        env_stamp_(map.size(), 0) {}

  std::vector<Vertex> plan(const FlowMap& flows, CostModel model,
                           const DistanceTable& goal_dist, Vertex start,
                           Vertex goal, const std::optional<FocalRatio>& focal) {
    if (goal_dist.source != goal)
      throw std::invalid_argument("goal_dist must be rooted at the goal");
    if (!map_->traversable(start) || !map_->traversable(goal))
      throw std::invalid_argument("start/goal must be traversable");
    if (!goal_dist.reachable(start))
      throw NoPathError("no path: goal unreachable from start");
    if (start == goal) return {start};
    if (focal) return focal_plan(flows, model, goal_dist, start, goal, *focal);
    return pure_plan(flows, model, goal_dist, start, goal);
  }

 private:
  // Expansion key ordering shared by both modes:
  // (f1, f2, f_len, larger g_len first, vertex index).
  struct PureEntry {
    int64_t f1, f2;
    int32_t flen, glen;
    Vertex v;
  };
  struct PureEntryAfter {
    bool operator()(const PureEntry& a, const PureEntry& b) const {
      if (a.f1 != b.f1) return a.f1 > b.f1;
      if (a.f2 != b.f2) return a.f2 > b.f2;
      if (a.flen != b.flen) return a.flen > b.flen;
      if (a.glen != b.glen) return a.glen < b.glen;
      return a.v > b.v;
    }
  };

  std::vector<Vertex> pure_plan(const FlowMap& flows, CostModel model,
                                const DistanceTable& goal_dist, Vertex start,
                                Vertex goal) {
    ++epoch_;
    std::priority_queue<PureEntry, std::vector<PureEntry>, PureEntryAfter> open;
    touch(start);
    g1_[start] = 0;
    g2_[start] = 0;
    glen_[start] = 0;
    parent_[start] = kNoVertex;
    open.push({0, goal_dist[start], goal_dist[start], 0, start});

    while (!open.empty()) {
      const PureEntry top = open.top();
      open.pop();
      const Vertex u = top.v;
      if (settled_[u] == epoch_) continue;
      // Stale duplicate: the stored label has improved since this push.
      if (top.f1 != g1_[u] || top.f2 != g2_[u] + goal_dist[u] ||
          top.glen != glen_[u])
        continue;
      settled_[u] = epoch_;
      if (u == goal) return reconstruct(goal);

      for (Vertex v : map_->neighbors(u)) {
        if (!goal_dist.reachable(v) || settled_[v] == epoch_) continue;
        const TwoPartCost w = edge_weight(model, flows, u, v);
        const int64_t n1 = g1_[u] + w.contraflow;
        const int64_t n2 = g2_[u] + w.distance;
        const int32_t nlen = glen_[u] + 1;
        touch(v);
        if (!improves(v, n1, n2, nlen)) continue;
        g1_[v] = n1;
        g2_[v] = n2;
        glen_[v] = nlen;
        parent_[v] = u;
        open.push({n1, n2 + goal_dist[v], nlen + goal_dist[v], nlen, v});
      }
    }
    throw NoPathError("no path found");  // unreachable given the BFS precheck
  }

  struct Label {
    Vertex v;
    int32_t glen;
    int64_t g1, g2;
    int32_t parent;  // label index, -1 at the root
    int32_t flen;
  };
  struct FocalEntry {
    int64_t f1, f2;
    int32_t glen;
    Vertex v;
    int32_t label;
  };
  struct FocalEntryAfter {
    bool operator()(const FocalEntry& a, const FocalEntry& b) const {
      if (a.f1 != b.f1) return a.f1 > b.f1;
      if (a.f2 != b.f2) return a.f2 > b.f2;
      if (a.glen != b.glen) return a.glen < b.glen;
      if (a.v != b.v) return a.v > b.v;
      return a.label > b.label;
    }
  };

  std::vector<Vertex> focal_plan(const FlowMap& flows, CostModel model,
                                 const DistanceTable& goal_dist, Vertex start,
                                 Vertex goal, FocalRatio w) {
    if (w.num < w.den) throw std::invalid_argument("focal factor must be >= 1");
    ++epoch_;
    const int32_t optimal_len = goal_dist[start];
    const int32_t hard_bound = static_cast<int32_t>(
        static_cast<int64_t>(w.num) * optimal_len / w.den);

    labels_.clear();
    buckets_.assign(hard_bound + 1, {});
    live_.assign(hard_bound + 1, 0);
    std::priority_queue<FocalEntry, std::vector<FocalEntry>, FocalEntryAfter> focal;

    env_touch(start);
    env_len_[start] = 0;
    env_g1_[start] = 0;
    env_g2_[start] = 0;
    labels_.push_back({start, 0, 0, 0, -1, optimal_len});
    buckets_[optimal_len].push_back(0);
    ++live_[optimal_len];

    int32_t f_min = optimal_len;
    int32_t admitted = -1;  // highest f_len already moved into FOCAL

    while (true) {
      while (f_min <= hard_bound && live_[f_min] == 0) ++f_min;
      if (f_min > hard_bound && focal.empty())
        throw NoPathError("no path within the focal length bound");
      const int32_t tau = std::min<int64_t>(
          hard_bound, static_cast<int64_t>(w.num) * f_min / w.den);
      for (int32_t b = admitted + 1; b <= tau; ++b) {
        for (int32_t id : buckets_[b]) {
          const Label& l = labels_[id];
          focal.push({l.g1, l.g2 + goal_dist[l.v], l.glen, l.v, id});
        }
        buckets_[b].clear();
      }
      if (tau > admitted) admitted = tau;
      if (focal.empty()) continue;

      const FocalEntry top = focal.top();
      focal.pop();
      const Label cur = labels_[top.label];
      --live_[cur.flen];
      // Superseded on both criteria by later labels: safe to drop.
      if (env_len_[cur.v] < cur.glen &&
          lex_less(env_g1_[cur.v], env_g2_[cur.v], cur.g1, cur.g2))
        continue;
      if (cur.v == goal) return reconstruct_labels(top.label);

      for (Vertex v : map_->neighbors(cur.v)) {
        if (!goal_dist.reachable(v)) continue;
        const TwoPartCost ew = edge_weight(model, flows, cur.v, v);
        const int64_t n1 = cur.g1 + ew.contraflow;
        const int64_t n2 = cur.g2 + ew.distance;
        const int32_t nlen = cur.glen + 1;
        const int32_t nflen = nlen + goal_dist[v];
        if (nflen > hard_bound) continue;
        env_touch(v);
        const bool better_len = nlen < env_len_[v];
        const bool better_g = lex_less(n1, n2, env_g1_[v], env_g2_[v]);
        if (!better_len && !better_g) continue;
        if (better_len) env_len_[v] = nlen;
        if (better_g) {
          env_g1_[v] = n1;
          env_g2_[v] = n2;
        }
        const int32_t id = static_cast<int32_t>(labels_.size());
        if (labels_.size() >= kMaxLabels)
          throw std::logic_error("focal label arena exhausted");
        labels_.push_back({v, nlen, n1, n2, top.label, nflen});
        ++live_[nflen];
        if (nflen <= admitted)
          focal.push({n1, n2 + goal_dist[v], nlen, v, id});
        else
          buckets_[nflen].push_back(id);
      }
    }
  }

  static bool lex_less(int64_t a1, int64_t a2, int64_t b1, int64_t b2) {
    return a1 != b1 ? a1 < b1 : a2 < b2;
  }

  bool improves(Vertex v, int64_t n1, int64_t n2, int32_t nlen) const {
    if (n1 != g1_[v]) return n1 < g1_[v];
    if (n2 != g2_[v]) return n2 < g2_[v];
    return nlen < glen_[v];
  }

  void touch(Vertex v) {
    if (stamp_[v] == epoch_) return;
    stamp_[v] = epoch_;
    g1_[v] = INT64_MAX;
    g2_[v] = INT64_MAX;
    glen_[v] = INT32_MAX;
    parent_[v] = kNoVertex;
  }

  void env_touch(Vertex v) {
    if (env_stamp_[v] == epoch_) return;
    env_stamp_[v] = epoch_;
    env_len_[v] = INT32_MAX;
    env_g1_[v] = INT64_MAX;
    env_g2_[v] = INT64_MAX;
  }

  std::vector<Vertex> reconstruct(Vertex goal) const {
    std::vector<Vertex> path;
    for (Vertex v = goal; v != kNoVertex; v = parent_[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
  }

  std::vector<Vertex> reconstruct_labels(int32_t id) const {
    std::vector<Vertex> path;
    for (int32_t i = id; i >= 0; i = labels_[i].parent)
      path.push_back(labels_[i].v);
    std::reverse(path.begin(), path.end());
    return path;
  }

  static constexpr size_t kMaxLabels = 1 << 24;

  const GridMap* map_;
  uint32_t epoch_ = 0;
  // Pure-mode per-vertex labels.
  std::vector<int64_t> g1_, g2_;
  std::vector<int32_t> glen_;
  std::vector<Vertex> parent_;
  std::vector<uint32_t> settled_, stamp_;
  // Focal-mode label arena and per-vertex envelopes.
  std::vector<Label> labels_;
  std::vector<std::vector<int32_t>> buckets_;
  std::vector<int32_t> live_;
  std::vector<int32_t> env_len_;
  std::vector<int64_t> env_g1_, env_g2_;
  std::vector<uint32_t> env_stamp_;
};

}  // namespace gmapf
