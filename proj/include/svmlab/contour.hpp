#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace svmlab {

struct Vertex {
  double x = 0.0;
  double y = 0.0;
};

/// Open or closed chain of vertices along the zero level of a sampled field.
struct Polyline {
  std::vector<Vertex> vertices;
  bool closed = false;
};

/// Zero level set of a field sampled on a rectangular grid, by marching
/// squares with linear interpolation along cell edges.
///
/// values[j * xs.size() + i] is the field at (xs[i], ys[j]). A node is
/// "positive" when its value is >= 0, matching sign(0) = +1. Saddle cells are
/// resolved with the cell-centre average. Vertices lying on the same grid edge
/// are shared exactly between neighbouring cells, so segments chain into
/// polylines without tolerance matching.
std::vector<Polyline> zero_level_lines(std::span<const double> xs, std::span<const double> ys,
                                       std::span<const double> values);

}  // namespace svmlab
