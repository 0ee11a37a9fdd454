#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cloudio.hpp"
#include "error.hpp"
#include "geometry.hpp"

namespace gprnet {

/// Exact k-nearest-neighbor table. Row i lists the k nearest other points of
/// point i by ascending Euclidean distance, ties broken by ascending index.
/// The query point is never its own neighbor; duplicates show up at distance 0.
struct NeighborGraph {
  std::size_t k = 0;
  std::vector<std::uint32_t> indices;  // n * k
  std::vector<double> distances;       // n * k

  std::size_t size() const { return k == 0 ? 0 : indices.size() / k; }
  std::span<const std::uint32_t> row(std::size_t i) const { return {indices.data() + i * k, k}; }
  std::span<const double> row_distances(std::size_t i) const { return {distances.data() + i * k, k}; }

  friend bool operator==(const NeighborGraph&, const NeighborGraph&) = default;
};

namespace detail {

inline void check_k(std::size_t n, std::size_t k) {
  if (k < 1 || k + 1 > n) {
    throw InvalidArgument("k-NN: k=" + std::to_string(k) + " out of range [1, " +
                          std::to_string(n == 0 ? 0 : n - 1) + "]");
  }
}

// (squared distance, index) with lexicographic order; this is the tie rule.
using Candidate = std::pair<double, std::uint32_t>;

inline void emit_row(NeighborGraph& g, std::size_t i, std::span<const Candidate> sorted) {
  for (std::size_t r = 0; r < g.k; ++r) {
    g.indices[i * g.k + r] = sorted[r].second;
    g.distances[i * g.k + r] = std::sqrt(sorted[r].first);
  }
}

}  // namespace detail

/// O(n^2) reference implementation.
inline NeighborGraph knn_bruteforce(std::span<const Vec3> points, std::size_t k) {
  const std::size_t n = points.size();
  detail::check_k(n, k);
  NeighborGraph g{k, std::vector<std::uint32_t>(n * k), std::vector<double>(n * k)};
  std::vector<detail::Candidate> cand;
  cand.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back(squared_distance(points[i], points[j]), static_cast<std::uint32_t>(j));
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    detail::emit_row(g, i, cand);
  }
  return g;
}

inline NeighborGraph knn_bruteforce(const PointCloud& cloud, std::size_t k) {
  return knn_bruteforce(cloud.points, k);
}

/// Static 3-d tree over a point set, answering exact k-NN queries with the
/// same tie rule as knn_bruteforce.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points, std::size_t leaf_size = 8)
      : points_(points), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    nodes_.reserve(2 * points.size() / leaf_size_ + 2);
    if (!points.empty()) build(0, points.size());
  }

  /// k nearest neighbors of `query`, skipping index `exclude`; ascending order.
  std::vector<detail::Candidate> nearest(const Vec3& query, std::size_t k,
                                         std::uint32_t exclude) const {
    Heap heap;
    if (!nodes_.empty()) search(0, query, k, exclude, heap);
    std::vector<detail::Candidate> out(heap.size());
    for (std::size_t r = out.size(); r-- > 0;) {
      out[r] = heap.top();
      heap.pop();
    }
    return out;
  }

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // range into order_
    std::int32_t left = -1, right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
    bool leaf() const { return left < 0; }
  };

  // Max-heap on (squared distance, index): top is the current worst kept.
  using Heap = std::priority_queue<detail::Candidate>;

  std::int32_t build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end)});
    if (end - begin <= leaf_size_) return id;

    Vec3 lo = points_[order_[begin]], hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], points_[order_[i]][a]);
        hi[a] = std::max(hi[a], points_[order_[i]][a]);
      }
    }
    std::uint8_t axis = 0;
    for (std::uint8_t a = 1; a < 3; ++a) {
      if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    }
    if (!(hi[axis] > lo[axis])) return id;  // all coincident: keep as leaf

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    // Left holds coordinates <= split, right >= split.
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    nodes_[static_cast<std::size_t>(id)].axis = axis;
    nodes_[static_cast<std::size_t>(id)].split = split;
    return id;
  }

  void search(std::int32_t id, const Vec3& q, std::size_t k, std::uint32_t exclude, Heap& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.leaf()) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t j = order_[i];
        if (j == exclude) continue;
        const detail::Candidate c{squared_distance(q, points_[j]), j};
        if (heap.size() < k) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    search(near, q, k, exclude, heap);
    // Equal distance is not pruned: a tied candidate may carry a lower index.
    if (heap.size() < k || diff * diff <= heap.top().first) search(far, q, k, exclude, heap);
  }

  std::span<const Vec3> points_;
  std::size_t leaf_size_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Kd-tree backed k-NN; same contract and output as knn_bruteforce.
inline NeighborGraph knn_kdtree(std::span<const Vec3> points, std::size_t k) {
  const std::size_t n = points.size();
  detail::check_k(n, k);
  NeighborGraph g{k, std::vector<std::uint32_t>(n * k), std::vector<double>(n * k)};
  const KdTree tree(points);
  for (std::size_t i = 0; i < n; ++i) {
    detail::emit_row(g, i, tree.nearest(points[i], k, static_cast<std::uint32_t>(i)));
  }
  return g;
}

inline NeighborGraph knn_kdtree(const PointCloud& cloud, std::size_t k) { return knn_kdtree(cloud.points, k); }

/// Debug dump: one row per point, k index columns.
inline void write_neighbor_csv(std::ostream& out, const NeighborGraph& g) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto r = g.row(i);
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
    out << '\n';
  }
}

}  // namespace gprnet
