#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace gprnet {

/// Symmetric reduction over the rows of a per-point feature matrix.
enum class Aggregator { kMax, kMean, kSum };

inline std::string to_string(Aggregator a) {
  switch (a) {
    case Aggregator::kMax: return "max";
    case Aggregator::kMean: return "mean";
    case Aggregator::kSum: return "sum";
  }
  return "?";
}

inline Aggregator parse_aggregator(std::string_view s) {
  if (s == "max") return Aggregator::kMax;
  if (s == "mean") return Aggregator::kMean;
  if (s == "sum") return Aggregator::kSum;
  throw InvalidArgument("unknown aggregator '" + std::string(s) + "' (expected max, mean or sum)");
}

struct GlobalFeature {
  std::vector<double> values;
  Aggregator aggregator = Aggregator::kMax;
};

inline GlobalFeature aggregate(const Matrix& features, Aggregator op) {
  if (features.rows() == 0) throw InvalidArgument("aggregate: empty feature matrix");
  const std::size_t d = features.cols();
  GlobalFeature g{std::vector<double>(features.row(0).begin(), features.row(0).end()), op};
  for (std::size_t r = 1; r < features.rows(); ++r) {
    const auto row = features.row(r);
    if (op == Aggregator::kMax) {
      for (std::size_t c = 0; c < d; ++c) g.values[c] = std::max(g.values[c], row[c]);
    } else {
      for (std::size_t c = 0; c < d; ++c) g.values[c] += row[c];
    }
  }
  if (op == Aggregator::kMean) {
    const double inv = 1.0 / static_cast<double>(features.rows());
    for (auto& v : g.values) v *= inv;
  }
  return g;
}

}  // namespace gprnet
