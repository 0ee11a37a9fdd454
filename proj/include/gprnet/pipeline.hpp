#pragma once

#include <string>
#include <string_view>

#include "cloudio.hpp"
#include "igi.hpp"
#include "laplace.hpp"
#include "neighbors.hpp"
#include "pool.hpp"

namespace gprnet {

/// Which per-point table the feature extractor emits.
enum class FeatureStage {
  kPsi,        // n x 15 intrinsic geometry
  kLaplacePsi, // n x 30 Laplace lift of the above
  kLaplaceXyz, // n x 6 Laplace lift of raw coordinates
};

inline FeatureStage parse_stage(std::string_view s) {
  if (s == "psi") return FeatureStage::kPsi;
  if (s == "lpsi") return FeatureStage::kLaplacePsi;
  if (s == "lp") return FeatureStage::kLaplaceXyz;
  throw InvalidArgument("unknown feature stage '" + std::string(s) + "' (expected psi, lpsi or lp)");
}

struct FeatureOptions {
  std::size_t k = 40;
  bool laplace = true;
  Aggregator aggregator = Aggregator::kMax;

  std::size_t width() const { return laplace ? 2 * IgiFeatures::kWidth : IgiFeatures::kWidth; }
};

inline Matrix point_features(const PointCloud& cloud, std::size_t k, FeatureStage stage) {
  const NeighborGraph graph = knn_kdtree(cloud, k);
  switch (stage) {
    case FeatureStage::kPsi: return compute_igi(cloud, graph).rows;
    case FeatureStage::kLaplacePsi: return laplace_lift(compute_igi(cloud, graph).rows, graph);
    case FeatureStage::kLaplaceXyz: return laplace_lift(coordinate_matrix(cloud), graph);
  }
  return {};
}

/// Cloud -> pooled descriptor that feeds the embedding layer.
inline GlobalFeature global_feature(const PointCloud& cloud, const FeatureOptions& opt) {
  const auto stage = opt.laplace ? FeatureStage::kLaplacePsi : FeatureStage::kPsi;
  return aggregate(point_features(cloud, opt.k, stage), opt.aggregator);
}

}  // namespace gprnet
