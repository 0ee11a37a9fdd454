#include <gtest/gtest.h>

#include <sstream>

#include "gprnet/neighbors.hpp"
#include "oracles.hpp"

using namespace gprnet;

TEST(KnnBruteforce, CollinearHandChecked) {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {3, 0, 0}};
  const auto g = knn_bruteforce(pts, 1);
  EXPECT_EQ(g.indices, (std::vector<std::uint32_t>{1, 0, 1}));
  EXPECT_EQ(g.distances, (std::vector<double>{1, 1, 2}));
}

TEST(KnnBruteforce, TieGoesToLowerIndex) {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}};
  EXPECT_EQ(knn_bruteforce(pts, 1).row(0)[0], 1u);
  EXPECT_EQ(knn_kdtree(pts, 1).row(0)[0], 1u);
}

TEST(Knn, KOutOfRange) {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {3, 0, 0}};
  EXPECT_THROW(knn_bruteforce(pts, 3), InvalidArgument);
  EXPECT_THROW(knn_kdtree(pts, 3), InvalidArgument);
  EXPECT_THROW(knn_bruteforce(pts, 0), InvalidArgument);
}

TEST(KnnKdtree, MatchesBruteforceUniformCube) {
  Rng rng(100);
  const auto pts = oracle::random_points(100, rng);
  EXPECT_EQ(knn_kdtree(pts, 10), knn_bruteforce(pts, 10));
}

TEST(KnnKdtree, MatchesBruteforceAtOperatingPoint) {
  Rng rng(512);
  const auto pts = oracle::random_points(512, rng, -1.0, 1.0);
  EXPECT_EQ(knn_kdtree(pts, 40), knn_bruteforce(pts, 40));
}

TEST(KnnKdtree, DuplicatesAreZeroDistanceNeighbors) {
  Rng rng(4);
  auto pts = oracle::random_points(50, rng);
  pts.push_back(pts[3]);
  pts.push_back(pts[3]);
  const auto g = knn_kdtree(pts, 3);
  EXPECT_EQ(g, knn_bruteforce(pts, 3));
  EXPECT_EQ(g.row(3)[0], 50u);
  EXPECT_EQ(g.row(3)[1], 51u);
  EXPECT_EQ(g.row_distances(3)[0], 0.0);
  EXPECT_EQ(g.row(51)[0], 3u);
  EXPECT_EQ(g.row(51)[1], 50u);
}

// Lattice points produce many exact distance ties.
TEST(KnnKdtree, MatchesBruteforceOnLattice) {
  std::vector<Vec3> pts;
  for (int x = 0; x < 6; ++x)
    for (int y = 0; y < 6; ++y)
      for (int z = 0; z < 6; ++z) pts.push_back({double(x), double(y), double(z)});
  for (std::size_t k : {1, 2, 6, 10, 26, 40}) EXPECT_EQ(knn_kdtree(pts, k), knn_bruteforce(pts, k)) << "k=" << k;
}

TEST(KnnKdtree, PropertyOracleEquivalence) {
  Rng rng(2024);
  std::uniform_int_distribution<std::size_t> size(81, 300);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = oracle::random_points(size(rng), rng);
    for (std::size_t k : {1, 2, 10, 20, 40, 80}) {
      ASSERT_EQ(knn_kdtree(pts, k), knn_bruteforce(pts, k)) << "trial " << trial << " k " << k;
    }
  }
}

TEST(Knn, RowsAreSortedAndSelfFree) {
  Rng rng(6);
  const auto pts = oracle::random_points(200, rng);
  const auto g = knn_kdtree(pts, 20);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto d = g.row_distances(i);
    EXPECT_TRUE(std::is_sorted(d.begin(), d.end()));
    for (auto j : g.row(i)) EXPECT_NE(j, i);
  }
}

TEST(Knn, TranslationInvariantIndices) {
  // Shift by a dyadic vector so coordinates stay exactly representable.
  Rng rng(8);
  auto pts = oracle::random_points(150, rng);
  for (auto& p : pts)
    for (double& v : p) v = std::round(v * 1024.0) / 1024.0;
  auto shifted = pts;
  for (auto& p : shifted) p = p + Vec3{4.0, -2.0, 8.0};
  EXPECT_EQ(knn_kdtree(pts, 12).indices, knn_kdtree(shifted, 12).indices);
}

TEST(Knn, CsvDump) {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {3, 0, 0}};
  std::ostringstream out;
  write_neighbor_csv(out, knn_bruteforce(pts, 2));
  EXPECT_EQ(out.str(), "1,2\n0,2\n1,0\n");
}
