#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "gmapf/grid_map.hpp"

namespace gmapf {

// Lexicographic edge/path cost: contraflow units first, then
// congestion-weighted distance. Componentwise addition, identity (0,0).
struct TwoPartCost {
  int64_t contraflow = 0;
  int64_t distance = 0;

  friend TwoPartCost operator+(TwoPartCost a, TwoPartCost b) {
    return {a.contraflow + b.contraflow, a.distance + b.distance};
  }
  TwoPartCost& operator+=(TwoPartCost b) {
    contraflow += b.contraflow;
    distance += b.distance;
    return *this;
  }
  auto operator<=>(const TwoPartCost&) const = default;
};

// How directed-edge flows turn into edge weights.
//   TwoPart            (c_e, 1 + p_v)
//   TwoPartNormalized  (c_e/n in fixed point, 1 + p_v)
//   SumOVC             (0, 1 + c_e + p_v)
//   SumNOVC            (0, 1 + ceil(c_e/n) + p_v)
//   VertexOnly         (0, 1 + p_v)             -- contraflow ignored
//   FreeFlow           (0, 1)
enum class CostModel {
  TwoPart,
  TwoPartNormalized,
  SumOVC,
  SumNOVC,
  VertexOnly,
  FreeFlow,
};

inline const char* to_string(CostModel m) {
  switch (m) {
    case CostModel::TwoPart: return "two-part";
    case CostModel::TwoPartNormalized: return "two-part-normalized";
    case CostModel::SumOVC: return "sum-ovc";
    case CostModel::SumNOVC: return "sum-novc";
    case CostModel::VertexOnly: return "vertex-only";
    case CostModel::FreeFlow: return "free-flow";
  }
  return "?";
}

// Normalized contraflow is kept in fixed point with this denominator so
// comparisons stay exact and platform independent.
inline constexpr int kContraflowFixedBits = 16;

// Traversal counts per directed edge, aggregated over the registered guide
// paths. Single writer; queries must not overlap mutations.
class FlowMap {
 public:
  explicit FlowMap(const GridMap& map)
      : map_(&map),
        flow_(static_cast<size_t>(map.size()) * kNumDirs, 0),
        inflow_(map.size(), 0) {}

  const GridMap& map() const { return *map_; }

  int32_t flow(Vertex from, Vertex to) const {
    const int d = map_->direction(from, to);
    return d < 0 ? 0 : flow_[static_cast<size_t>(from) * kNumDirs + d];
  }

  // Total flow entering v over all incoming directed edges.
  int32_t inflow(Vertex v) const { return inflow_[v]; }

  void add_edge(Vertex from, Vertex to, int32_t delta) {
    const int d = map_->direction(from, to);
    if (d < 0) throw std::invalid_argument("flow edge endpoints not adjacent");
    int32_t& f = flow_[static_cast<size_t>(from) * kNumDirs + d];
    if (f + delta < 0)
      throw std::logic_error("flow underflow: removing a path that is not registered");
    f += delta;
    inflow_[to] += delta;
  }

  void add_path(std::span<const Vertex> path) { apply(path, +1); }
  void remove_path(std::span<const Vertex> path) { apply(path, -1); }

  void clear() {
    flow_.assign(flow_.size(), 0);
    inflow_.assign(inflow_.size(), 0);
  }

  bool operator==(const FlowMap& other) const {
    return flow_ == other.flow_;
  }

  // `u,v,flow` rows for nonzero directed edges, in (u, direction) order.
  void dump_csv(std::ostream& out) const {
    out << "u,v,flow\n";
    for (Vertex u = 0; u < map_->size(); ++u)
      for (int d = 0; d < kNumDirs; ++d) {
        const int32_t f = flow_[static_cast<size_t>(u) * kNumDirs + d];
        if (f != 0) out << u << ',' << map_->step(u, d) << ',' << f << '\n';
      }
  }

 private:
  void apply(std::span<const Vertex> path, int32_t delta) {
    for (size_t i = 1; i < path.size(); ++i)
      add_edge(path[i - 1], path[i], delta);
  }

  const GridMap* map_;
  std::vector<int32_t> flow_;
  std::vector<int32_t> inflow_;
};

struct VertexCongestion {
  int64_t total;      // c_v: least total delay when n agents enter at once
  int64_t per_agent;  // p_v = ceil((n-1)/2)
};

inline VertexCongestion congestion_from_entrants(int64_t n) {
  if (n <= 0) return {0, 0};
  return {n * (n - 1) / 2, n / 2};  // n/2 == ceil((n-1)/2) for n >= 1
}

inline VertexCongestion vertex_congestion(const FlowMap& flows, Vertex v) {
  return congestion_from_entrants(flows.inflow(v));
}

// c_e = f(v1->v2) * f(v2->v1): opposing use of an undirected edge.
inline int64_t contraflow_congestion(const FlowMap& flows, Vertex v1, Vertex v2) {
  return static_cast<int64_t>(flows.flow(v1, v2)) * flows.flow(v2, v1);
}

// c_e / (f12 + f21) in fixed point (floor), 0 when the edge is unused.
inline int64_t normalized_contraflow_fp(const FlowMap& flows, Vertex v1, Vertex v2) {
  const int64_t f12 = flows.flow(v1, v2);
  const int64_t f21 = flows.flow(v2, v1);
  const int64_t n = f12 + f21;
  if (n == 0) return 0;
  return ((f12 * f21) << kContraflowFixedBits) / n;
}

// Prices a traversal of (from, to) for the agent being planned. The
// contraflow component is evaluated at the load including that traversal,
// the usual link-cost convention in traffic assignment: entering a lane
// against f opposing units costs (f_same + 1) * f_opp even when f_same is
// still zero. Evaluating at the current load instead makes every one-way
// lane free for the first opposing entrant, and the planner then seeds
// head-on traffic precisely where flows are densest. The congestion
// observables (vertex_congestion, contraflow_congestion) report the
// current state and are unaffected.
inline TwoPartCost edge_weight(CostModel model, const FlowMap& flows,
                               Vertex from, Vertex to) {
  if (model == CostModel::FreeFlow) return {0, 1};
  const int64_t p_v = congestion_from_entrants(flows.inflow(to)).per_agent;
  switch (model) {
    case CostModel::TwoPart: {
      const int64_t with_me = flows.flow(from, to) + 1;
      return {with_me * flows.flow(to, from), 1 + p_v};
    }
    case CostModel::TwoPartNormalized: {
      const int64_t f12 = flows.flow(from, to) + 1;
      const int64_t f21 = flows.flow(to, from);
      const int64_t cf = f12 * f21;
      return {cf == 0 ? 0 : (cf << kContraflowFixedBits) / (f12 + f21), 1 + p_v};
    }
    case CostModel::SumOVC:
      return {0, 1 + contraflow_congestion(flows, from, to) + p_v};
    case CostModel::SumNOVC: {
      // Exact rational ceiling of c_e / n; no fixed point needed here.
      const int64_t f12 = flows.flow(from, to);
      const int64_t f21 = flows.flow(to, from);
      const int64_t n = f12 + f21;
      const int64_t ceil_ncf = n == 0 ? 0 : (f12 * f21 + n - 1) / n;
      return {0, 1 + ceil_ncf + p_v};
    }
    case CostModel::VertexOnly:
      return {0, 1 + p_v};
    case CostModel::FreeFlow:
      break;
  }
  return {0, 1};
}

}  // namespace gmapf
