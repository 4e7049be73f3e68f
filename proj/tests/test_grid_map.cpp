#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "gmapf/grid_map.hpp"
#include "gmapf/rng.hpp"
#include "test_support.hpp"

using namespace gmapf;

TEST_CASE("parse_map reads a 2x2 map with a blocked cell") {
  std::istringstream in("type octile\nheight 2\nwidth 2\nmap\n.@\n..\n");
  const GridMap map = parse_map(in);
  CHECK(map.width() == 2);
  CHECK(map.height() == 2);
  CHECK(map.traversable(0));
  CHECK(!map.traversable(1));
  CHECK(map.traversable(2));
  CHECK(map.traversable(3));
}

TEST_CASE("parse_map rejects row count mismatch") {
  std::istringstream in("type octile\nheight 3\nwidth 2\nmap\n..\n..\n");
  CHECK_THROWS_WITH_AS(parse_map(in), doctest::Contains("row count mismatch"),
                       ParseError);
}

TEST_CASE("parse_map rejects row length mismatch with line number") {
  std::istringstream in("type octile\nheight 2\nwidth 3\nmap\n...\n..\n");
  CHECK_THROWS_WITH_AS(parse_map(in), doctest::Contains("line 6"), ParseError);
}

TEST_CASE("parse_map rejects unknown cell characters") {
  std::istringstream in("type octile\nheight 1\nwidth 2\nmap\n.S\n");
  CHECK_THROWS_WITH_AS(parse_map(in), doctest::Contains("unknown cell"),
                       ParseError);
}

TEST_CASE("parse_map rejects malformed headers") {
  std::istringstream in("height 2\nwidth 2\nmap\n..\n..\n");
  CHECK_THROWS_AS(parse_map(in), ParseError);
  std::istringstream in2("type octile\nheight x\nwidth 2\nmap\n..\n..\n");
  CHECK_THROWS_AS(parse_map(in2), ParseError);
}

TEST_CASE("1x1 map: single vertex, no edges") {
  std::istringstream in("type octile\nheight 1\nwidth 1\nmap\n.\n");
  const GridMap map = parse_map(in);
  CHECK(map.num_traversable() == 1);
  CHECK(map.neighbors(0).size() == 0);
}

TEST_CASE("neighbors come back in N,E,S,W order") {
  const GridMap map = test::open_map(3, 3);
  const Vertex center = map.at(1, 1);
  const auto nb = map.neighbors(center);
  REQUIRE(nb.size() == 4);
  CHECK(nb[0] == map.at(0, 1));  // N
  CHECK(nb[1] == map.at(1, 2));  // E
  CHECK(nb[2] == map.at(2, 1));  // S
  CHECK(nb[3] == map.at(1, 0));  // W

  CHECK(map.neighbors(map.at(0, 0)).size() == 2);  // corner

  const GridMap walled = test::ascii_map({"@.@", "...", "@.@"});
  CHECK(walled.neighbors(walled.at(1, 1)).size() == 4);
  const GridMap boxed = test::ascii_map({".@.", "@.@", ".@."});
  CHECK(boxed.neighbors(boxed.at(1, 1)).size() == 0);
}

TEST_CASE("bfs_distances on an open 3x3 map from the center") {
  const GridMap map = test::open_map(3, 3);
  const DistanceTable d = bfs_distances(map, map.at(1, 1));
  int at_one = 0;
  for (Vertex v = 0; v < map.size(); ++v) {
    CHECK(d[v] <= 2);
    at_one += d[v] == 1;
  }
  CHECK(at_one == 4);
  CHECK(d[map.at(1, 1)] == 0);
}

TEST_CASE("bfs_distances marks the far side of a wall unreachable") {
  const GridMap map = test::ascii_map({".@.", ".@.", ".@."});
  const DistanceTable d = bfs_distances(map, map.at(0, 0));
  CHECK(!d.reachable(map.at(0, 2)));
  CHECK(!d.reachable(map.at(2, 2)));
  CHECK(d.reachable(map.at(2, 0)));
}

TEST_CASE("bfs_distances equals reference Dijkstra on random 20x20 maps") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const GridMap map = test::random_map(rng, 20, 20, 0.3);
    const auto cells = test::traversable_cells(map);
    const Vertex src = cells[rng.bounded(cells.size())];
    const DistanceTable d = bfs_distances(map, src);
    const auto ref = test::ref_dijkstra_unit(map, src);
    for (Vertex v = 0; v < map.size(); ++v)
      if (map.traversable(v)) CHECK(d[v] == ref[v]);
  }
}

TEST_CASE("triangle step property on random maps") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const GridMap map = test::random_map(rng, 16, 16, 0.25);
    const auto cells = test::traversable_cells(map);
    const DistanceTable d = bfs_distances(map, cells[rng.bounded(cells.size())]);
    for (Vertex u : cells)
      for (Vertex v : map.neighbors(u)) {
        if (!d.reachable(u) || !d.reachable(v)) {
          CHECK(d.reachable(u) == d.reachable(v));
          continue;
        }
        CHECK(std::abs(d[u] - d[v]) <= 1);
      }
  }
}

TEST_CASE("serialize_map then parse_map is the identity") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const GridMap map = test::random_map(rng, 12, 9, 0.35);
    std::ostringstream out;
    serialize_map(map, out);
    std::istringstream in(out.str());
    const GridMap back = parse_map(in);
    REQUIRE(back.width() == map.width());
    REQUIRE(back.height() == map.height());
    for (Vertex v = 0; v < map.size(); ++v)
      CHECK(back.traversable(v) == map.traversable(v));
  }
}

TEST_CASE("bfs distances are symmetric on undirected grids") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const GridMap map = test::random_map(rng, 14, 14, 0.3);
    const auto cells = test::traversable_cells(map);
    const Vertex a = cells[rng.bounded(cells.size())];
    const Vertex b = cells[rng.bounded(cells.size())];
    CHECK(bfs_distances(map, a)[b] == bfs_distances(map, b)[a]);
  }
}

TEST_CASE("scenario round trip keeps (x=col, y=row) convention") {
  const GridMap map = test::open_map(5, 3);
  Scenario scen;
  scen.starts = {map.at(0, 4), map.at(2, 1)};
  scen.goals = {map.at(1, 3), map.at(0, 0)};
  std::ostringstream out;
  serialize_scenario(scen, map, "toy.map", out);
  const std::string text = out.str();
  CHECK(text.find("4\t0\t3\t1") != std::string::npos);  // sx sy gx gy of agent 0
  std::istringstream in(text);
  const Scenario back = parse_scenario(in, map);
  CHECK(back.starts == scen.starts);
  CHECK(back.goals == scen.goals);
}

TEST_CASE("parse_scenario rejects bad entries") {
  const GridMap map = test::ascii_map({"..", ".@"});
  std::istringstream blocked("version 1\n0\tm\t2\t2\t1\t1\t0\t0\t0\n");
  CHECK_THROWS_AS(parse_scenario(blocked, map), ParseError);
  std::istringstream outside("version 1\n0\tm\t2\t2\t5\t0\t0\t0\t0\n");
  CHECK_THROWS_AS(parse_scenario(outside, map), ParseError);
  std::istringstream dup("version 1\n0\tm\t2\t2\t0\t0\t1\t0\t0\n0\tm\t2\t2\t0\t0\t0\t1\t0\n");
  CHECK_THROWS_AS(parse_scenario(dup, map), ParseError);
}
