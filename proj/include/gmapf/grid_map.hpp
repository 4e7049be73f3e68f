#pragma once

#include <cstdint>
#include <deque>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmapf {

// Cell id in row-major order; valid vertices are always traversable.
using Vertex = int32_t;
inline constexpr Vertex kNoVertex = -1;
inline constexpr int32_t kUnreachable = std::numeric_limits<int32_t>::max();

// Fixed expansion order. Downstream tie-breaking (search, PIBT preferences)
// relies on this order being stable.
enum Dir : int { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };
inline constexpr int kNumDirs = 4;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 4-connected grid of traversable/blocked cells. Immutable after
// construction; safe for concurrent reads.
class GridMap {
 public:
  GridMap(int width, int height, std::vector<uint8_t> traversable)
      : width_(width), height_(height), cells_(std::move(traversable)) {
    if (width_ < 1 || height_ < 1)
      throw std::invalid_argument("grid dimensions must be >= 1");
    if (static_cast<int>(cells_.size()) != width_ * height_)
      throw std::invalid_argument("traversable size != width*height");
    num_traversable_ = 0;
    for (uint8_t c : cells_) num_traversable_ += (c != 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int size() const { return width_ * height_; }
  int num_traversable() const { return num_traversable_; }

  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  Vertex at(int row, int col) const { return row * width_ + col; }
  int row(Vertex v) const { return v / width_; }
  int col(Vertex v) const { return v % width_; }
  bool traversable(Vertex v) const {
    return v >= 0 && v < size() && cells_[v] != 0;
  }

  // Neighbor in direction d, or kNoVertex when outside/blocked.
  Vertex step(Vertex v, int d) const {
    const int r = row(v) + kRowDelta[d];
    const int c = col(v) + kColDelta[d];
    if (!in_bounds(r, c)) return kNoVertex;
    const Vertex u = at(r, c);
    return cells_[u] ? u : kNoVertex;
  }

  struct Neighbors {
    Vertex v[kNumDirs];
    int n = 0;
    const Vertex* begin() const { return v; }
    const Vertex* end() const { return v + n; }
    int size() const { return n; }
    Vertex operator[](int i) const { return v[i]; }
  };

  // Traversable 4-neighbors of v, in N,E,S,W order. Excludes v itself;
  // the Wait move is added by callers that need it.
  Neighbors neighbors(Vertex v) const {
    Neighbors out;
    for (int d = 0; d < kNumDirs; ++d) {
      const Vertex u = step(v, d);
      if (u != kNoVertex) out.v[out.n++] = u;
    }
    return out;
  }

  // Direction from u to an adjacent v, or -1.
  int direction(Vertex u, Vertex v) const {
    const int dr = row(v) - row(u);
    const int dc = col(v) - col(u);
    for (int d = 0; d < kNumDirs; ++d)
      if (kRowDelta[d] == dr && kColDelta[d] == dc) return d;
    return -1;
  }

  bool adjacent(Vertex u, Vertex v) const { return direction(u, v) >= 0; }

  static constexpr int kRowDelta[kNumDirs] = {-1, 0, 1, 0};
  static constexpr int kColDelta[kNumDirs] = {0, 1, 0, -1};

 private:
  int width_;
  int height_;
  std::vector<uint8_t> cells_;
  int num_traversable_;
};

// Starts and goals, one per agent. In lifelong mode the goals are the
// agents' first tasks; subsequent tasks come from the task assigner.
struct Scenario {
  std::vector<Vertex> starts;
  std::vector<Vertex> goals;
  int num_agents() const { return static_cast<int>(starts.size()); }
};

// Exact free-flow distances from a single source; kUnreachable marks cells
// in other components. Immutable after construction.
struct DistanceTable {
  Vertex source = kNoVertex;
  std::vector<int32_t> dist;
  int32_t operator[](Vertex v) const { return dist[v]; }
  bool reachable(Vertex v) const { return dist[v] != kUnreachable; }
};

inline DistanceTable bfs_distances(const GridMap& map, Vertex source) {
  if (!map.traversable(source))
    throw std::invalid_argument("bfs source not traversable");
  DistanceTable table;
  table.source = source;
  table.dist.assign(map.size(), kUnreachable);
  table.dist[source] = 0;
  std::deque<Vertex> queue{source};
  while (!queue.empty()) {
    const Vertex u = queue.front();
    queue.pop_front();
    const int32_t d = table.dist[u] + 1;
    for (Vertex v : map.neighbors(u)) {
      if (table.dist[v] == kUnreachable) {
        table.dist[v] = d;
        queue.push_back(v);
      }
    }
  }
  return table;
}

// True when all traversable cells form a single component.
inline bool fully_connected(const GridMap& map) {
  Vertex first = kNoVertex;
  for (Vertex v = 0; v < map.size(); ++v)
    if (map.traversable(v)) {
      first = v;
      break;
    }
  if (first == kNoVertex) return false;
  const DistanceTable d = bfs_distances(map, first);
  for (Vertex v = 0; v < map.size(); ++v)
    if (map.traversable(v) && !d.reachable(v)) return false;
  return true;
}

namespace detail {

inline ParseError parse_error(int line, const std::string& what) {
  return ParseError("line " + std::to_string(line) + ": " + what);
}

inline std::string next_line(std::istream& in, int& line_no, bool& ok) {
  std::string line;
  ok = static_cast<bool>(std::getline(in, line));
  if (ok) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }
  return line;
}

}  // namespace detail

// movingai .map format: `type octile`, `height H`, `width W`, `map`, then
// H rows of W cells. `.`/`G` traversable; `@`/`T`/`O` blocked; anything
// else is rejected. Diagonal moves of the octile family are not modeled.
inline GridMap parse_map(std::istream& in) {
  int line_no = 0;
  bool ok = false;
  std::string line = detail::next_line(in, line_no, ok);
  if (!ok || line.rfind("type", 0) != 0)
    throw detail::parse_error(line_no, "expected 'type ...' header");
  int width = -1, height = -1;
  for (int i = 0; i < 2; ++i) {
    line = detail::next_line(in, line_no, ok);
    std::istringstream iss(line);
    std::string key;
    int value = 0;
    if (!ok || !(iss >> key >> value) || value < 1)
      throw detail::parse_error(line_no, "expected 'height H' or 'width W'");
    if (key == "height")
      height = value;
    else if (key == "width")
      width = value;
    else
      throw detail::parse_error(line_no, "unknown header key '" + key + "'");
  }
  if (width < 1 || height < 1)
    throw detail::parse_error(line_no, "missing width or height");
  line = detail::next_line(in, line_no, ok);
  if (!ok || line != "map")
    throw detail::parse_error(line_no, "expected 'map' line");

  std::vector<uint8_t> cells;
  cells.reserve(static_cast<size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    line = detail::next_line(in, line_no, ok);
    if (!ok) throw detail::parse_error(line_no, "row count mismatch");
    if (static_cast<int>(line.size()) != width)
      throw detail::parse_error(line_no, "row length mismatch");
    for (char c : line) {
      switch (c) {
        case '.':
        case 'G':
          cells.push_back(1);
          break;
        case '@':
        case 'T':
        case 'O':
          cells.push_back(0);
          break;
        default:
          throw detail::parse_error(
              line_no, std::string("unknown cell character '") + c + "'");
      }
    }
  }
  return GridMap(width, height, std::move(cells));
}

inline void serialize_map(const GridMap& map, std::ostream& out) {
  out << "type octile\n"
      << "height " << map.height() << "\n"
      << "width " << map.width() << "\n"
      << "map\n";
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c)
      out << (map.traversable(map.at(r, c)) ? '.' : '@');
    out << '\n';
  }
}

// movingai .scen format: optional `version ...` header, then per line
// `bucket map w h sx sy gx gy optimal`. Coordinates are (x=column, y=row).
inline Scenario parse_scenario(std::istream& in, const GridMap& map) {
  Scenario scen;
  int line_no = 0;
  bool ok = false;
  std::string line = detail::next_line(in, line_no, ok);
  if (ok && line.rfind("version", 0) == 0) line = detail::next_line(in, line_no, ok);
  while (ok) {
    if (!line.empty()) {
      std::istringstream iss(line);
      int bucket, w, h, sx, sy, gx, gy;
      std::string map_name;
      double optimal;
      if (!(iss >> bucket >> map_name >> w >> h >> sx >> sy >> gx >> gy >> optimal))
        throw detail::parse_error(line_no, "malformed scenario entry");
      if (!map.in_bounds(sy, sx) || !map.in_bounds(gy, gx))
        throw detail::parse_error(line_no, "coordinates outside the map");
      const Vertex s = map.at(sy, sx);
      const Vertex g = map.at(gy, gx);
      if (!map.traversable(s) || !map.traversable(g))
        throw detail::parse_error(line_no, "start or goal on a blocked cell");
      scen.starts.push_back(s);
      scen.goals.push_back(g);
    }
    line = detail::next_line(in, line_no, ok);
  }
  for (size_t i = 0; i < scen.starts.size(); ++i)
    for (size_t j = i + 1; j < scen.starts.size(); ++j)
      if (scen.starts[i] == scen.starts[j])
        throw ParseError("duplicate start location for agents " +
                         std::to_string(i) + " and " + std::to_string(j));
  return scen;
}

inline void serialize_scenario(const Scenario& scen, const GridMap& map,
                               const std::string& map_name, std::ostream& out) {
  out << "version 1\n";
  for (int i = 0; i < scen.num_agents(); ++i) {
    const Vertex s = scen.starts[i];
    const Vertex g = scen.goals[i];
    out << 0 << '\t' << map_name << '\t' << map.width() << '\t' << map.height()
        << '\t' << map.col(s) << '\t' << map.row(s) << '\t' << map.col(g)
        << '\t' << map.row(g) << '\t' << 0 << '\n';
  }
}

inline GridMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  return parse_map(in);
}

inline Scenario load_scenario(const std::string& path, const GridMap& map) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  return parse_scenario(in, map);
}

}  // namespace gmapf
