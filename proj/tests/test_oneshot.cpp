#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>
#include <vector>

#include "gmapf/mapgen.hpp"
#include "gmapf/oneshot.hpp"
#include "test_support.hpp"

using namespace gmapf;

namespace {

int count_kind(const std::vector<Defect>& defects, DefectKind kind) {
  int n = 0;
  for (const auto& d : defects) n += d.kind == kind;
  return n;
}

}  // namespace

TEST_CASE("one agent: solution cost equals its BFS distance") {
  const GridMap map = test::open_map(7, 7);
  Scenario scen;
  scen.starts = {map.at(0, 0)};
  scen.goals = {map.at(6, 3)};
  OneshotConfig cfg;
  const OneshotResult r = solve_oneshot(map, scen, cfg);
  REQUIRE(r.solved);
  CHECK(validate(r.solution, map, scen).empty());
  CHECK(sic(r.solution, scen.goals) == bfs_distances(map, scen.goals[0])[scen.starts[0]]);
}

TEST_CASE("two crossing agents on an open 5x5 map solve cleanly") {
  const GridMap map = test::open_map(5, 5);
  Scenario scen;
  scen.starts = {map.at(2, 0), map.at(0, 2)};
  scen.goals = {map.at(2, 4), map.at(4, 2)};
  OneshotConfig cfg;
  const OneshotResult r = solve_oneshot(map, scen, cfg);
  REQUIRE(r.solved);
  CHECK(validate(r.solution, map, scen).empty());
  int64_t lower = 0;
  for (int a = 0; a < 2; ++a)
    lower += bfs_distances(map, scen.goals[a])[scen.starts[a]];
  CHECK(sic(r.solution, scen.goals) >= lower);
}

TEST_CASE("validator: a swap is exactly one edge conflict") {
  const GridMap map = test::open_map(2, 1);
  Scenario scen;
  scen.starts = {0, 1};
  scen.goals = {1, 0};
  Solution sol;
  sol.paths = {{0, 1}, {1, 0}};
  const auto defects = validate(sol, map, scen);
  REQUIRE(defects.size() == 1);
  CHECK(defects[0].kind == DefectKind::EdgeConflict);
  CHECK(defects[0].t == 0);
}

TEST_CASE("validator: crafted defects are each detected exactly once") {
  const GridMap map = test::open_map(3, 3);

  SUBCASE("vertex conflict") {
    Scenario scen;
    scen.starts = {map.at(0, 0), map.at(1, 1)};
    scen.goals = {map.at(0, 2), map.at(1, 1)};
    Solution sol;
    sol.paths = {{map.at(0, 0), map.at(0, 1), map.at(0, 2)},
                 {map.at(1, 1), map.at(0, 1), map.at(1, 1)}};
    const auto defects = validate(sol, map, scen);
    REQUIRE(defects.size() == 1);
    CHECK(defects[0].kind == DefectKind::VertexConflict);
    CHECK(defects[0].where == map.at(0, 1));
    CHECK(defects[0].t == 1);
  }
  SUBCASE("non-adjacent transition") {
    Scenario scen;
    scen.starts = {map.at(0, 0)};
    scen.goals = {map.at(0, 2)};
    Solution sol;
    sol.paths = {{map.at(0, 0), map.at(0, 2)}};
    const auto defects = validate(sol, map, scen);
    REQUIRE(defects.size() == 1);
    CHECK(defects[0].kind == DefectKind::BadTransition);
  }
  SUBCASE("wrong start") {
    Scenario scen;
    scen.starts = {map.at(0, 0)};
    scen.goals = {map.at(0, 1)};
    Solution sol;
    sol.paths = {{map.at(0, 1)}};
    const auto defects = validate(sol, map, scen);
    REQUIRE(defects.size() == 1);
    CHECK(defects[0].kind == DefectKind::WrongStart);
  }
  SUBCASE("terminal rest away from the goal") {
    Scenario scen;
    scen.starts = {map.at(0, 0)};
    scen.goals = {map.at(0, 1)};
    Solution sol;
    sol.paths = {{map.at(0, 0)}};
    const auto defects = validate(sol, map, scen);
    REQUIRE(defects.size() == 1);
    CHECK(defects[0].kind == DefectKind::NotAtGoal);
  }
  SUBCASE("a clean solution reports nothing") {
    Scenario scen;
    scen.starts = {map.at(0, 0), map.at(2, 2)};
    scen.goals = {map.at(0, 1), map.at(2, 1)};
    Solution sol;
    sol.paths = {{map.at(0, 0), map.at(0, 1)}, {map.at(2, 2), map.at(2, 1)}};
    CHECK(validate(sol, map, scen).empty());
  }
}

TEST_CASE("sic counts every wait and move until the final arrival") {
  const GridMap map = test::open_map(4, 1);
  const std::vector<Vertex> goals{3};

  Solution at_goal;
  at_goal.paths = {{3, 3, 3}};
  CHECK(sic(at_goal, goals) == 0);

  Solution straight;
  straight.paths = {{0, 1, 2, 3}};
  CHECK(sic(straight, goals) == 3);

  Solution waits;
  waits.paths = {{2, 2, 2, 3}};
  CHECK(sic(waits, goals) == 3);

  // Pushed off the goal: cost runs to the final arrival.
  Solution bounced;
  bounced.paths = {{2, 3, 2, 3, 3}};
  CHECK(sic(bounced, goals) == 3);
}

TEST_CASE("livelocked instances fail deterministically") {
  const GridMap map = test::open_map(2, 1);
  Scenario scen;
  scen.starts = {0, 1};
  scen.goals = {1, 0};
  OneshotConfig cfg;
  cfg.step_limit = 30;
  const OneshotResult a = solve_oneshot(map, scen, cfg);
  const OneshotResult b = solve_oneshot(map, scen, cfg);
  CHECK(!a.solved);
  CHECK(a.unfinished == std::vector<int>{0, 1});
  CHECK(b.unfinished == a.unfinished);
  for (int i = 0; i < 2; ++i) CHECK(a.solution.paths[i] == b.solution.paths[i]);
  // The executed trajectory is still conflict free.
  int conflicts = 0;
  for (const auto& d : validate(a.solution, map, scen))
    conflicts += d.kind == DefectKind::VertexConflict || d.kind == DefectKind::EdgeConflict;
  CHECK(conflicts == 0);
}

TEST_CASE("solution files round trip") {
  const GridMap map = test::open_map(4, 4);
  Scenario scen;
  scen.starts = {map.at(0, 0), map.at(3, 3)};
  scen.goals = {map.at(0, 3), map.at(3, 0)};
  OneshotConfig cfg;
  const OneshotResult r = solve_oneshot(map, scen, cfg);
  REQUIRE(r.solved);
  std::ostringstream out;
  write_solution(r.solution, out);
  std::istringstream in(out.str());
  const Solution back = parse_solution(in);
  REQUIRE(back.num_agents() == 2);
  CHECK(back.paths == r.solution.paths);
  CHECK(validate(back, map, scen).empty());
}

TEST_CASE("random solved instances always validate cleanly") {
  Rng rng(103);
  for (int trial = 0; trial < 15; ++trial) {
    const MapSpec spec{.archetype = Archetype::Sortation,
                       .width = 16,
                       .height = 12,
                       .seed = rng.next()};
    const GridMap map = generate(spec);
    const Scenario scen = generate_scenario(map, 10, rng.next());
    OneshotConfig cfg;
    cfg.guided = trial % 2 == 0;
    cfg.seed = trial;
    const OneshotResult r = solve_oneshot(map, scen, cfg);
    if (!r.solved) continue;  // PIBT is incomplete for one-shot
    CHECK(validate(r.solution, map, scen).empty());
    int64_t lower = 0;
    for (int a = 0; a < scen.num_agents(); ++a)
      lower += bfs_distances(map, scen.goals[a])[scen.starts[a]];
    CHECK(sic(r.solution, scen.goals) >= lower);
  }
}

TEST_CASE("guided and unguided arms solve paired seeds and stay valid") {
  // Direction of the SIC means (guided <= unguided) is asserted at scale in
  // the acceptance suite; PIBT is incomplete one-shot, so individual seeds
  // may livelock and are skipped here.
  const MapSpec spec{.archetype = Archetype::Sortation, .width = 10, .height = 10, .seed = 4};
  const GridMap map = generate(spec);
  int both_solved = 0;
  for (uint64_t seed = 0; seed < 8; ++seed) {
    const Scenario scen = generate_scenario(map, 8, seed);
    bool ok = true;
    for (bool guided : {false, true}) {
      OneshotConfig cfg;
      cfg.guided = guided;
      cfg.seed = seed;
      const OneshotResult r = solve_oneshot(map, scen, cfg);
      ok = ok && r.solved;
      if (r.solved) CHECK(validate(r.solution, map, scen).empty());
    }
    both_solved += ok;
  }
  CHECK(both_solved >= 5);
}

TEST_CASE("unreachable one-shot goals are input errors") {
  const GridMap map = test::ascii_map({".@.", ".@.", ".@."});
  Scenario scen;
  scen.starts = {map.at(0, 0)};
  scen.goals = {map.at(0, 2)};
  OneshotConfig cfg;
  CHECK_THROWS_AS(solve_oneshot(map, scen, cfg), NoPathError);
}
