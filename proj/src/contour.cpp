#include <svmlab/contour.hpp>
#include <svmlab/core.hpp>

#include <array>
#include <map>
#include <utility>

namespace svmlab {

namespace {

using EdgeKey = std::size_t;

struct Grid {
  std::span<const double> xs;
  std::span<const double> ys;
  std::span<const double> values;

  std::size_t nx() const { return xs.size(); }
  double at(std::size_t i, std::size_t j) const { return values[j * nx() + i]; }
  bool positive(std::size_t i, std::size_t j) const { return at(i, j) >= 0.0; }

  // Horizontal edge (i,j)-(i+1,j) and vertical edge (i,j)-(i,j+1).
  EdgeKey horizontal(std::size_t i, std::size_t j) const { return 2 * (j * nx() + i); }
  EdgeKey vertical(std::size_t i, std::size_t j) const { return 2 * (j * nx() + i) + 1; }

  Vertex crossing(EdgeKey e) const {
    const std::size_t node = e / 2;
    const std::size_t i = node % nx();
    const std::size_t j = node / nx();
    const bool is_vertical = (e % 2) == 1;
    const std::size_t i2 = is_vertical ? i : i + 1;
    const std::size_t j2 = is_vertical ? j + 1 : j;
    const double a = at(i, j);
    const double b = at(i2, j2);
    const double t = a == b ? 0.5 : a / (a - b);
    return {xs[i] + t * (xs[i2] - xs[i]), ys[j] + t * (ys[j2] - ys[j])};
  }
};

}  // namespace

std::vector<Polyline> zero_level_lines(std::span<const double> xs, std::span<const double> ys,
                                       std::span<const double> values) {
  if (xs.size() < 2 || ys.size() < 2) throw InputError("zero_level_lines: grid needs at least 2 x 2 nodes");
  if (values.size() != xs.size() * ys.size()) throw InputError("zero_level_lines: value count does not match grid");
  const Grid grid{xs, ys, values};

  std::vector<std::pair<EdgeKey, EdgeKey>> segments;
  for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const bool p00 = grid.positive(i, j);
      const bool p10 = grid.positive(i + 1, j);
      const bool p11 = grid.positive(i + 1, j + 1);
      const bool p01 = grid.positive(i, j + 1);
      const EdgeKey bottom = grid.horizontal(i, j);
      const EdgeKey top = grid.horizontal(i, j + 1);
      const EdgeKey left = grid.vertical(i, j);
      const EdgeKey right = grid.vertical(i + 1, j);

      std::array<EdgeKey, 4> crossed{};
      std::size_t count = 0;
      if (p00 != p10) crossed[count++] = bottom;
      if (p10 != p11) crossed[count++] = right;
      if (p01 != p11) crossed[count++] = top;
      if (p00 != p01) crossed[count++] = left;

      if (count == 2) {
        segments.emplace_back(crossed[0], crossed[1]);
      } else if (count == 4) {
        const double centre = 0.25 * (grid.at(i, j) + grid.at(i + 1, j) + grid.at(i + 1, j + 1) + grid.at(i, j + 1));
        if ((centre >= 0.0) == p00) {
          segments.emplace_back(bottom, right);
          segments.emplace_back(top, left);
        } else {
          segments.emplace_back(left, bottom);
          segments.emplace_back(right, top);
        }
      }
    }
  }

  std::map<EdgeKey, std::vector<std::size_t>> incident;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    incident[segments[s].first].push_back(s);
    incident[segments[s].second].push_back(s);
  }

  std::vector<bool> used(segments.size(), false);
  std::vector<Polyline> lines;
  auto trace = [&](EdgeKey start, bool closed_allowed) {
    Polyline line;
    line.vertices.push_back(grid.crossing(start));
    EdgeKey at = start;
    for (;;) {
      std::size_t next = segments.size();
      for (std::size_t s : incident[at]) {
        if (!used[s]) {
          next = s;
          break;
        }
      }
      if (next == segments.size()) break;
      used[next] = true;
      at = segments[next].first == at ? segments[next].second : segments[next].first;
      if (closed_allowed && at == start) {
        line.closed = true;
        break;
      }
      line.vertices.push_back(grid.crossing(at));
    }
    lines.push_back(std::move(line));
  };

  // Open chains start at edges with a single incident segment (the grid border).
  for (const auto& [edge, segs] : incident) {
    if (segs.size() == 1 && !used[segs.front()]) trace(edge, false);
  }
  for (const auto& [edge, segs] : incident) {
    for (std::size_t s : segs) {
      if (!used[s]) trace(edge, true);
    }
  }
  return lines;
}

}  // namespace svmlab
