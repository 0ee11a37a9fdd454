#include <gtest/gtest.h>

#include "gprnet/ball.hpp"
#include "oracles.hpp"

using namespace gprnet;

namespace {

std::vector<double> axis(std::size_t n, std::size_t i, double v) {
  std::vector<double> x(n, 0.0);
  x[i] = v;
  return x;
}

}  // namespace

TEST(PoincareDistance, IdentityIsZero) {
  Rng rng(1);
  const auto x = oracle::random_in_ball(32, 0.9, rng);
  EXPECT_EQ(poincare_distance(BallPoint(x, Curvature(1.0)), BallPoint(x, Curvature(1.0))), 0.0);
}

TEST(PoincareDistance, ClosedFormFromOrigin) {
  const Curvature c(1.0);
  const double d = poincare_distance(BallPoint(std::vector<double>(32, 0.0), c), BallPoint(axis(32, 0, 0.5), c));
  // arcosh(1 + 2 * 0.25 / 0.75) = arcosh(5/3) = ln 3
  EXPECT_NEAR(d, std::log(3.0), 1e-12);
  EXPECT_NEAR(d, 1.098612, 1e-6);
}

TEST(PoincareDistance, FlatLimit) {
  Rng rng(2);
  const Curvature c(1e-8);
  for (int t = 0; t < 100; ++t) {
    const auto x = oracle::random_in_ball(32, 0.5, rng);
    const auto y = oracle::random_in_ball(32, 0.5, rng);
    const double flat = 2.0 * std::sqrt(ball::squared_distance(x, y));
    EXPECT_NEAR(poincare_distance(BallPoint(x, c), BallPoint(y, c)) / flat, 1.0, 1e-4);
  }
}

TEST(PoincareDistance, MonotoneFlatConvergence) {
  Rng rng(3);
  const auto x = oracle::random_in_ball(32, 0.5, rng);
  const auto y = oracle::random_in_ball(32, 0.5, rng);
  const double flat = 2.0 * std::sqrt(ball::squared_distance(x, y));
  double prev = std::numeric_limits<double>::infinity();
  for (double c : {1e-2, 1e-4, 1e-6}) {
    const double err = std::abs(poincare_distance(BallPoint(x, Curvature(c)), BallPoint(y, Curvature(c))) - flat);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(PoincareDistance, Errors) {
  EXPECT_THROW(BallPoint(axis(4, 0, 1.0), Curvature(1.0)), InvalidArgument);
  EXPECT_THROW(BallPoint(axis(4, 0, 0.5), Curvature(4.0)), InvalidArgument);  // radius 1/2
  EXPECT_THROW(Curvature(0.0), InvalidArgument);
  EXPECT_THROW(Curvature(-1.0), InvalidArgument);
  EXPECT_THROW(poincare_distance(BallPoint(axis(4, 0, 0.1), Curvature(1.0)), BallPoint(axis(4, 0, 0.1), Curvature(0.5))),
               InvalidArgument);
}

TEST(PoincareDistance, MetricAxioms) {
  Rng rng(4);
  for (double cv : {0.01, 0.1, 1.0}) {
    const Curvature c(cv);
    const double radius = 0.999 / std::sqrt(cv);
    for (int t = 0; t < 1000; ++t) {
      const BallPoint x(oracle::random_in_ball(8, radius, rng), c);
      const BallPoint y(oracle::random_in_ball(8, radius, rng), c);
      const BallPoint z(oracle::random_in_ball(8, radius, rng), c);
      const double xy = poincare_distance(x, y), yx = poincare_distance(y, x);
      EXPECT_EQ(xy, yx);
      EXPECT_GE(xy, 0.0);
      EXPECT_GE(poincare_distance(x, z) + poincare_distance(z, y) - xy, -1e-9);
    }
  }
}

TEST(ExpMap, OriginAndSaturation) {
  const Curvature c(1.0);
  const auto zero = exp_map_origin(std::vector<double>(32, 0.0), c);
  for (double v : zero.coords()) EXPECT_EQ(v, 0.0);
  const auto far = exp_map_origin(axis(32, 0, 1e6), c);
  EXPECT_LT(ball::squared_norm(far.coords()), 1.0);
  EXPECT_TRUE(ball::inside(far.coords(), c));
}

TEST(ExpMap, SmallCurvatureIsNearIdentity) {
  Rng rng(5);
  const Curvature c(1e-10);
  for (int t = 0; t < 50; ++t) {
    const auto v = oracle::random_in_ball(32, 1.0, rng);
    const auto p = exp_map_origin(v, c);
    EXPECT_NEAR(std::sqrt(ball::squared_norm(p.coords())) / std::sqrt(ball::squared_norm(v)), 1.0, 1e-4);
  }
}

TEST(ExpMap, AlwaysInsideBall) {
  Rng rng(6);
  for (double cv : {0.01, 1.0, 10.0}) {
    for (int t = 0; t < 200; ++t) {
      const auto v = oracle::random_vector(32, std::pow(10.0, t % 7 - 2), rng);
      EXPECT_TRUE(ball::inside(ball::exp_map_origin(v, Curvature(cv)), Curvature(cv)));
    }
  }
}

TEST(ExpMap, VjpMatchesFiniteDifferences) {
  Rng rng(7);
  for (double cv : {1e-3, 0.1, 1.0}) {
    const Curvature c(cv);
    for (int t = 0; t < 10; ++t) {
      const auto v = oracle::random_vector(8, 0.8, rng);
      const auto u = oracle::random_vector(8, 1.0, rng);
      auto f = [&](const std::vector<double>& x) {
        const auto y = ball::exp_map_origin(x, c);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += u[i] * y[i];
        return s;
      };
      EXPECT_LT(oracle::max_relative_error(ball::exp_map_origin_vjp(v, u, c), oracle::finite_difference(f, v)), 1e-6);
    }
  }
  // tiny vectors go through the series branch
  const std::vector<double> tiny{1e-7, -2e-7, 3e-8};
  const std::vector<double> u{0.3, 0.1, -0.2};
  const auto g = ball::exp_map_origin_vjp(tiny, u, Curvature(1.0));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(g[i], u[i], 1e-12);
}

TEST(DistanceGrad, MatchesFiniteDifferences) {
  Rng rng(8);
  for (double cv : {0.01, 0.1, 1.0}) {
    const Curvature c(cv);
    const double radius = 0.9 / std::sqrt(cv);
    for (int t = 0; t < 100; ++t) {
      const auto x = oracle::random_in_ball(32, radius, rng);
      const auto y = oracle::random_in_ball(32, radius, rng);
      const auto g = distance_grad(BallPoint(x, c), BallPoint(y, c));
      EXPECT_FALSE(g.coincident);
      const auto fx = oracle::finite_difference([&](const std::vector<double>& p) { return ball::distance(p, y, c); }, x);
      const auto fy = oracle::finite_difference([&](const std::vector<double>& p) { return ball::distance(x, p, c); }, y);
      EXPECT_LT(oracle::max_relative_error(g.dx, fx), 1e-4);
      EXPECT_LT(oracle::max_relative_error(g.dy, fy), 1e-4);
    }
  }
}

TEST(DistanceGrad, ReflectedPairSymmetry) {
  Rng rng(9);
  const Curvature c(1.0);
  const auto x = oracle::random_in_ball(16, 0.8, rng);
  std::vector<double> y(x);
  for (double& v : y) v = -v;
  const auto g = distance_grad(BallPoint(x, c), BallPoint(y, c));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(g.dx[i], -g.dy[i], 1e-12);
}

TEST(DistanceGrad, FlatLimit) {
  Rng rng(10);
  const Curvature c(1e-8);
  for (int t = 0; t < 20; ++t) {
    const auto x = oracle::random_in_ball(32, 0.5, rng);
    const auto y = oracle::random_in_ball(32, 0.5, rng);
    const double d = std::sqrt(ball::squared_distance(x, y));
    std::vector<double> flat(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) flat[i] = 2.0 * (x[i] - y[i]) / d;
    const auto g = distance_grad(BallPoint(x, c), BallPoint(y, c));
    EXPECT_LT(oracle::max_relative_error(g.dx, flat, 1e-2), 1e-3);
  }
}

TEST(DistanceGrad, CoincidentPointsGiveZeroAndFlag) {
  const Curvature c(1.0);
  const auto x = axis(8, 2, 0.3);
  const auto g = distance_grad(BallPoint(x, c), BallPoint(x, c));
  EXPECT_TRUE(g.coincident);
  for (double v : g.dx) EXPECT_EQ(v, 0.0);
  for (double v : g.dy) EXPECT_EQ(v, 0.0);
}

TEST(DistanceGrad, EuclideanBranch) {
  const std::vector<double> x{3, 0}, y{0, 4};
  EXPECT_EQ(ball::euclidean_distance(x, y), 5.0);
  const auto g = ball::euclidean_distance_grad(x, y);
  EXPECT_NEAR(g.dx[0], 0.6, 1e-15);
  EXPECT_NEAR(g.dx[1], -0.8, 1e-15);
  EXPECT_TRUE(ball::euclidean_distance_grad(x, x).coincident);
}
