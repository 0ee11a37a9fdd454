#pragma once

#include <cmath>

#include "cloudio.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "neighbors.hpp"

namespace gprnet {

/// Per-point intrinsic geometry descriptor, 15 columns:
///   [0,3)   position p
///   [3,6)   e1, unit edge to the nearest neighbor
///   [6,9)   e2, unit edge to the second nearest neighbor
///   [9,12)  n = e1 x e2, left unnormalized so its length is |sin(angle)|
///   [12,15) s, per-coordinate population std of the k neighbor positions
struct IgiFeatures {
  static constexpr std::size_t kWidth = 15;
  static constexpr std::size_t kPosition = 0;
  static constexpr std::size_t kEdge1 = 3;
  static constexpr std::size_t kEdge2 = 6;
  static constexpr std::size_t kNormal = 9;
  static constexpr std::size_t kSpread = 12;

  Matrix rows;

  Vec3 block(std::size_t i, std::size_t offset) const {
    return {rows(i, offset), rows(i, offset + 1), rows(i, offset + 2)};
  }
};

inline IgiFeatures compute_igi(std::span<const Vec3> points, const NeighborGraph& graph) {
  if (graph.k < 2) throw InvalidArgument("compute_igi: needs k >= 2, got " + std::to_string(graph.k));
  if (graph.size() != points.size()) {
    throw InvalidArgument("compute_igi: graph has " + std::to_string(graph.size()) + " rows for " +
                          std::to_string(points.size()) + " points");
  }
  const std::size_t n = points.size();
  const double inv_k = 1.0 / static_cast<double>(graph.k);
  IgiFeatures out{Matrix(n, IgiFeatures::kWidth)};
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = points[i];
    const auto nb = graph.row(i);
    const Vec3 e1 = normalized_or_zero(points[nb[0]] - p);
    const Vec3 e2 = normalized_or_zero(points[nb[1]] - p);
    const Vec3 nrm = cross(e1, e2);

    Vec3 mean{0.0, 0.0, 0.0};
    for (auto j : nb) mean = mean + points[j];
    mean = inv_k * mean;
    Vec3 var{0.0, 0.0, 0.0};
    for (auto j : nb) {
      const Vec3 d = points[j] - mean;
      for (int a = 0; a < 3; ++a) var[a] += d[a] * d[a];
    }

    auto row = out.rows.row(i);
    for (int a = 0; a < 3; ++a) {
      row[IgiFeatures::kPosition + a] = p[a];
      row[IgiFeatures::kEdge1 + a] = e1[a];
      row[IgiFeatures::kEdge2 + a] = e2[a];
      row[IgiFeatures::kNormal + a] = nrm[a];
      row[IgiFeatures::kSpread + a] = std::sqrt(var[a] * inv_k);
    }
  }
  return out;
}

inline IgiFeatures compute_igi(const PointCloud& cloud, const NeighborGraph& graph) {
  return compute_igi(cloud.points, graph);
}

}  // namespace gprnet
