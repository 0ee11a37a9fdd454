#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace gprnet {

/// Magnitude c > 0 of the (negative) curvature of a Poincare ball of radius 1/sqrt(c).
class Curvature {
 public:
  explicit Curvature(double c) : c_(c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("curvature must be finite and > 0");
  }
  double value() const { return c_; }
  friend bool operator==(const Curvature&, const Curvature&) = default;

 private:
  double c_;
};

namespace ball {

/// Points must satisfy c*|x|^2 < 1 - kMargin.
inline constexpr double kMargin = 1e-7;
/// Below this arcosh excess the distance gradient is reported as zero.
inline constexpr double kClamp = 1e-15;

inline double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

inline bool inside(std::span<const double> x, Curvature c) {
  return c.value() * squared_norm(x) < 1.0 - kMargin;
}

/// Rescales x in place onto the safety shell when it violates the margin.
inline void project_inside(std::span<double> x, Curvature c) {
  const double limit = (1.0 - kMargin) / c.value();
  const double sq = squared_norm(x);
  if (sq < limit) return;
  // Aim a hair inside the shell so rounding cannot push it back out.
  const double scale = std::sqrt(limit / sq) * (1.0 - 1e-15);
  for (double& v : x) v *= scale;
}

}  // namespace ball

/// A point strictly inside the ball of curvature c, margin included.
class BallPoint {
 public:
  BallPoint(std::vector<double> coords, Curvature c) : coords_(std::move(coords)), c_(c) {
    if (!ball::inside(coords_, c_)) throw InvalidArgument("BallPoint: point lies on or outside the ball");
  }

  std::span<const double> coords() const { return coords_; }
  Curvature curvature() const { return c_; }
  std::size_t dim() const { return coords_.size(); }

 private:
  std::vector<double> coords_;
  Curvature c_;
};

namespace ball {

// Excess delta of the arcosh argument, z = 1 + delta.
inline double arcosh_excess(std::span<const double> x, std::span<const double> y, double c) {
  const double a = 1.0 - c * squared_norm(x);
  const double b = 1.0 - c * squared_norm(y);
  return 2.0 * c * squared_distance(x, y) / (a * b);
}

// arcosh(1 + delta) without forming 1 + delta, exact near delta = 0.
inline double arcosh1p(double delta) { return std::log1p(delta + std::sqrt(delta * (delta + 2.0))); }

/// Unchecked distance on raw coordinates; callers guarantee both are inside.
inline double distance(std::span<const double> x, std::span<const double> y, Curvature c) {
  const double delta = std::max(arcosh_excess(x, y, c.value()), 0.0);
  return arcosh1p(delta) / std::sqrt(c.value());
}

}  // namespace ball

/// Geodesic distance (1/sqrt c) arcosh(1 + 2c|x-y|^2 / ((1-c|x|^2)(1-c|y|^2))).
inline double poincare_distance(const BallPoint& x, const BallPoint& y) {
  if (!(x.curvature() == y.curvature())) throw InvalidArgument("poincare_distance: curvature mismatch");
  if (x.dim() != y.dim()) throw InvalidArgument("poincare_distance: dimension mismatch");
  return ball::distance(x.coords(), y.coords(), x.curvature());
}

struct DistanceGradient {
  std::vector<double> dx;
  std::vector<double> dy;
  /// x == y exactly; both gradients are zero.
  bool coincident = false;
  /// arcosh argument inside the clamp region; both gradients are zero.
  bool clamped = false;
};

namespace ball {

/// Gradients of ball::distance w.r.t. both arguments' ambient coordinates.
inline DistanceGradient distance_grad(std::span<const double> x, std::span<const double> y, Curvature curv) {
  const std::size_t n = x.size();
  DistanceGradient g{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const double c = curv.value();
  const double u = squared_distance(x, y);
  if (u == 0.0) {
    g.coincident = true;
    g.clamped = true;
    return g;
  }
  const double a = 1.0 - c * squared_norm(x);
  const double b = 1.0 - c * squared_norm(y);
  const double delta = 2.0 * c * u / (a * b);
  if (delta <= kClamp) {
    g.clamped = true;
    return g;
  }
  // dd/dz = 1 / (sqrt(c) sqrt(z^2 - 1)), z^2 - 1 = delta (delta + 2)
  const double dd_dz = 1.0 / (std::sqrt(c) * std::sqrt(delta * (delta + 2.0)));
  const double scale = dd_dz * 4.0 * c / (a * b);
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = x[i] - y[i];
    g.dx[i] = scale * (diff + c * u * x[i] / a);
    g.dy[i] = scale * (-diff + c * u * y[i] / b);
  }
  return g;
}

/// Euclidean distance |x - y| and its gradients, for the flat embedding space.
inline double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  return std::sqrt(squared_distance(x, y));
}

inline DistanceGradient euclidean_distance_grad(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  DistanceGradient g{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const double d = euclidean_distance(x, y);
  if (d == 0.0) {
    g.coincident = true;
    return g;
  }
  for (std::size_t i = 0; i < n; ++i) {
    g.dx[i] = (x[i] - y[i]) / d;
    g.dy[i] = -g.dx[i];
  }
  return g;
}

// tanh(s)/s and its derivative divided by s, both with series near s = 0.
inline double tanh_ratio(double s) {
  if (s < 1e-4) return 1.0 - s * s / 3.0;
  return std::tanh(s) / s;
}

// d/ds [tanh(s)/s] / s = (s sech^2 s - tanh s) / s^3
inline double tanh_ratio_slope_over_s(double s) {
  if (s < 1e-3) return -2.0 / 3.0 + 8.0 / 15.0 * s * s;
  const double t = std::tanh(s);
  return (s * (1.0 - t * t) - t) / (s * s * s);
}

/// exp_0(v) = tanh(sqrt(c)|v|) v / (sqrt(c)|v|) on raw coordinates, then the
/// safety projection.
inline std::vector<double> exp_map_origin(std::span<const double> v, Curvature curv) {
  const double sc = std::sqrt(curv.value());
  const double s = sc * std::sqrt(squared_norm(v));
  const double alpha = tanh_ratio(s);
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x *= alpha;
  project_inside(out, curv);
  return out;
}

/// Vector-Jacobian product J^T u of exp_map_origin at v. J is symmetric:
/// J = alpha I + (alpha'(r)/r) v v^T with r = |v|. The safety projection is
/// treated as the identity.
inline std::vector<double> exp_map_origin_vjp(std::span<const double> v, std::span<const double> u,
                                              Curvature curv) {
  const double c = curv.value();
  const double s = std::sqrt(c) * std::sqrt(squared_norm(v));
  const double alpha = tanh_ratio(s);
  // alpha'(r)/r = c * (d alpha/ds)/s
  const double beta = c * tanh_ratio_slope_over_s(s);
  double vu = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) vu += v[i] * u[i];
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = alpha * u[i] + beta * vu * v[i];
  return out;
}

}  // namespace ball

inline BallPoint exp_map_origin(std::span<const double> v, Curvature c) {
  return BallPoint(ball::exp_map_origin(v, c), c);
}

/// Gradient of poincare_distance; zero with `coincident` set when x == y.
inline DistanceGradient distance_grad(const BallPoint& x, const BallPoint& y) {
  if (!(x.curvature() == y.curvature())) throw InvalidArgument("distance_grad: curvature mismatch");
  if (x.dim() != y.dim()) throw InvalidArgument("distance_grad: dimension mismatch");
  return ball::distance_grad(x.coords(), y.coords(), x.curvature());
}

}  // namespace gprnet
