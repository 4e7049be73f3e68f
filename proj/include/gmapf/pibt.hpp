#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gmapf/grid_map.hpp"
#include "gmapf/guidance.hpp"
#include "gmapf/rng.hpp"

namespace gmapf {

// Move preference for one agent: guided agents sort candidates by the guide
// heuristic (dp, dg); everyone else by free-flow distance to the goal. A
// guided candidate the heuristic cannot reach falls back to free-flow
// distance and ranks after all reachable ones.
struct PibtPrefs {
  const DistanceTable* dist = nullptr;  // required
  GuideHeuristic* guide = nullptr;      // optional
};

// Priority inheritance with backtracking: plans one joint step. Higher
// priority agents claim their preferred moves and recursively push the
// current occupants; a failed push makes the pusher try its next candidate.
// Priorities carry over between steps: agents at their goal reset to the
// lowest epoch, everyone else increments.
class PibtPlanner {
 public:
  PibtPlanner(const GridMap& map, int num_agents)
      : map_(&map),
        epochs_(num_agents, 0),
        rank_(num_agents),
        theta_(num_agents),
        order_(num_agents),
        claims_(map.size(), 0),
        occupant_(map.size(), -1) {
    for (int i = 0; i < num_agents; ++i) rank_[i] = i;
  }

  // Optional seeded shake-up of the id tie-break used within equal epochs.
  void shuffle_ranks(Rng& rng) { rng.shuffle(rank_); }

  int num_agents() const { return static_cast<int>(theta_.size()); }

  // Computes the next move for every agent. Positions must be pairwise
  // distinct traversable cells.
  const std::vector<Vertex>& plan_step(std::span<const Vertex> positions,
                                       std::span<const Vertex> goals,
                                       std::span<const PibtPrefs> prefs) {
    const int k = num_agents();
    positions_ = positions;
    goals_ = goals;
    prefs_ = prefs;
    for (int i = 0; i < k; ++i) {
      theta_[i] = kNoVertex;
      if (positions[i] == goals[i])
        epochs_[i] = 0;
      else
        ++epochs_[i];
      occupant_[positions[i]] = i;
    }
    for (int i = 0; i < k; ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(), [&](int a, int b) {
      if (epochs_[a] != epochs_[b]) return epochs_[a] > epochs_[b];
      return rank_[a] < rank_[b];
    });
    for (int i : order_)
      if (theta_[i] == kNoVertex) recurse(i, -1);
    for (int i = 0; i < k; ++i) {
      occupant_[positions[i]] = -1;
      --claims_[theta_[i]];
    }
    return theta_;
  }

 private:
  struct Candidate {
    int64_t key1, key2;
    int order;  // N,E,S,W = 0..3, Wait = 4; ties resolve in this order
    Vertex v;
  };

  void preference_key(int agent, Vertex v, int64_t& key1, int64_t& key2) const {
    const PibtPrefs& p = prefs_[agent];
    if (p.guide != nullptr && p.guide->built()) {
      const auto [dp, dg] = p.guide->query(v);
      if (dp != kUnreachable) {
        key1 = dp + dg;
        key2 = dg;
        return;
      }
      key1 = kUnreachable;  // off-component: rank after all guided candidates
      key2 = (*p.dist)[v];
      return;
    }
    key1 = (*p.dist)[v];
    key2 = 0;
  }

  bool recurse(int ai, int aj) {
    const Vertex from = positions_[ai];
    Candidate cands[kNumDirs + 1];
    int n = 0;
    for (int d = 0; d < kNumDirs; ++d) {
      const Vertex v = map_->step(from, d);
      if (v == kNoVertex) continue;
      cands[n].v = v;
      cands[n].order = d;
      preference_key(ai, v, cands[n].key1, cands[n].key2);
      ++n;
    }
    cands[n].v = from;  // Wait; ties place it after move candidates
    cands[n].order = kNumDirs;
    preference_key(ai, from, cands[n].key1, cands[n].key2);
    ++n;
    std::sort(cands, cands + n, [](const Candidate& a, const Candidate& b) {
      if (a.key1 != b.key1) return a.key1 < b.key1;
      if (a.key2 != b.key2) return a.key2 < b.key2;
      return a.order < b.order;
    });

    for (int i = 0; i < n; ++i) {
      const Vertex v = cands[i].v;
      if (claims_[v] > 0) continue;                    // vertex conflict guard
      if (aj >= 0 && positions_[aj] == v) continue;    // swap guard
      set_theta(ai, v);
      const int occupant = occupant_[v];
      if (occupant >= 0 && occupant != ai && theta_[occupant] == kNoVertex) {
        if (!recurse(occupant, ai)) continue;          // push failed, next candidate
      }
      return true;
    }
    set_theta(ai, from);
    return false;
  }

  void set_theta(int agent, Vertex v) {
    if (theta_[agent] != kNoVertex) --claims_[theta_[agent]];
    theta_[agent] = v;
    ++claims_[v];
  }

  const GridMap* map_;
  std::vector<int64_t> epochs_;
  std::vector<int> rank_;
  std::vector<Vertex> theta_;
  std::vector<int> order_;
  std::vector<int32_t> claims_;
  std::vector<int> occupant_;
  std::span<const Vertex> positions_;
  std::span<const Vertex> goals_;
  std::span<const PibtPrefs> prefs_;
};

// Per-step validity: every move stays on an adjacent-or-same cell, no two
// agents share a target, and no pair swaps across the same edge.
inline int count_step_conflicts(const GridMap& map,
                                std::span<const Vertex> from,
                                std::span<const Vertex> to) {
  int conflicts = 0;
  const int k = static_cast<int>(from.size());
  std::vector<int> claim(map.size(), -1);
  std::vector<int> at(map.size(), -1);
  for (int i = 0; i < k; ++i) at[from[i]] = i;
  for (int i = 0; i < k; ++i) {
    if (to[i] != from[i] && !map.adjacent(from[i], to[i])) ++conflicts;
    if (claim[to[i]] >= 0) ++conflicts;  // vertex conflict
    claim[to[i]] = i;
  }
  for (int i = 0; i < k; ++i) {
    const int j = at[to[i]];
    if (j >= 0 && j != i && to[j] == from[i] && i < j) ++conflicts;  // swap
  }
  for (int i = 0; i < k; ++i) {
    claim[to[i]] = -1;
    at[from[i]] = -1;
  }
  return conflicts;
}

}  // namespace gmapf
