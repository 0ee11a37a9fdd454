#pragma once

#include "cloudio.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "neighbors.hpp"

namespace gprnet {

/// Concatenates each feature row with the mean difference to its k
/// coordinate-space neighbors: [f_i, (1/k) sum_j (f_j - f_i)]. Output is n x 2d.
inline Matrix laplace_lift(const Matrix& features, const NeighborGraph& graph) {
  if (features.rows() != graph.size()) {
    throw InvalidArgument("laplace_lift: " + std::to_string(features.rows()) + " feature rows but " +
                          std::to_string(graph.size()) + " graph rows");
  }
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  const double inv_k = 1.0 / static_cast<double>(graph.k);
  Matrix out(n, 2 * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto fi = features.row(i);
    auto row = out.row(i);
    for (std::size_t c = 0; c < d; ++c) row[c] = fi[c];
    for (auto j : graph.row(i)) {
      const auto fj = features.row(j);
      for (std::size_t c = 0; c < d; ++c) row[d + c] += fj[c] - fi[c];
    }
    for (std::size_t c = 0; c < d; ++c) row[d + c] *= inv_k;
  }
  return out;
}

/// Raw coordinates as an n x 3 matrix.
inline Matrix coordinate_matrix(std::span<const Vec3> points) {
  Matrix m(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t a = 0; a < 3; ++a) m(i, a) = points[i][a];
  }
  return m;
}

inline Matrix coordinate_matrix(const PointCloud& cloud) { return coordinate_matrix(cloud.points); }

}  // namespace gprnet
