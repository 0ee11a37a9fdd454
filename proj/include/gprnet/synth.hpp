#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cloudio.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "random.hpp"

namespace gprnet {

enum class ShapeFamily { kSphere, kCube, kCylinder, kCone, kTorus, kTetrahedron, kPlane };

inline constexpr std::array<ShapeFamily, 7> kAllFamilies{ShapeFamily::kSphere,      ShapeFamily::kCube,
                                                         ShapeFamily::kCylinder,    ShapeFamily::kCone,
                                                         ShapeFamily::kTorus,       ShapeFamily::kTetrahedron,
                                                         ShapeFamily::kPlane};

inline std::string to_string(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::kSphere: return "sphere";
    case ShapeFamily::kCube: return "cube";
    case ShapeFamily::kCylinder: return "cylinder";
    case ShapeFamily::kCone: return "cone";
    case ShapeFamily::kTorus: return "torus";
    case ShapeFamily::kTetrahedron: return "tetrahedron";
    case ShapeFamily::kPlane: return "plane";
  }
  return "?";
}

inline ShapeFamily parse_family(std::string_view s) {
  for (auto f : kAllFamilies) {
    if (to_string(f) == s) return f;
  }
  throw InvalidArgument("unknown shape family '" + std::string(s) + "'");
}

struct ShapeSpec {
  ShapeFamily family = ShapeFamily::kSphere;
  std::size_t n_points = 512;
  double jitter_sigma = 0.0;
  bool random_rotation = false;
  std::uint64_t seed = 0;
};

namespace synth {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kTorusMajor = 1.0;
inline constexpr double kTorusMinor = 0.35;

/// Regular tetrahedron inscribed in the cube [-1,1]^3.
inline TriangleMesh tetrahedron_mesh() {
  return {{{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}, {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}}};
}

inline TriangleMesh cube_mesh() {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) m.vertices.push_back({i & 1 ? 1.0 : -1.0, i & 2 ? 1.0 : -1.0, i & 4 ? 1.0 : -1.0});
  m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

inline TriangleMesh plane_mesh() { return {{{-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0}}, {{0, 1, 2}, {0, 2, 3}}}; }

/// Uniform surface samples of the family's canonical shape, before any
/// normalization. Sphere samples come in antipodal pairs.
inline std::vector<Vec3> surface(ShapeFamily family, std::size_t n, Rng& rng) {
  std::vector<Vec3> pts;
  pts.reserve(n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  switch (family) {
    case ShapeFamily::kSphere:
      while (pts.size() < n) {
        Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
        const double r = norm(v);
        if (r < 1e-12) continue;
        v = (1.0 / r) * v;
        pts.push_back(v);
        if (pts.size() < n) pts.push_back((-1.0) * v);
      }
      break;
    case ShapeFamily::kCube: return sample_mesh(cube_mesh(), n, rng).points;
    case ShapeFamily::kTetrahedron: return sample_mesh(tetrahedron_mesh(), n, rng).points;
    case ShapeFamily::kPlane: return sample_mesh(plane_mesh(), n, rng).points;
    case ShapeFamily::kCylinder: {
      // radius 1, z in [-1, 1]: side area 4pi, each cap pi
      for (std::size_t i = 0; i < n; ++i) {
        const double pick = uniform01(rng) * 6.0;
        const double theta = kTwoPi * uniform01(rng);
        if (pick < 4.0) {
          pts.push_back({std::cos(theta), std::sin(theta), 2.0 * uniform01(rng) - 1.0});
        } else {
          const double r = std::sqrt(uniform01(rng));
          pts.push_back({r * std::cos(theta), r * std::sin(theta), pick < 5.0 ? 1.0 : -1.0});
        }
      }
      break;
    }
    case ShapeFamily::kCone: {
      // base radius 1 at z = -1, apex at z = 1; lateral area pi*sqrt(5), base pi
      const double lateral = std::sqrt(5.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double theta = kTwoPi * uniform01(rng);
        const double r = std::sqrt(uniform01(rng));
        if (uniform01(rng) * (lateral + 1.0) < lateral) {
          pts.push_back({r * std::cos(theta), r * std::sin(theta), 1.0 - 2.0 * r});
        } else {
          pts.push_back({r * std::cos(theta), r * std::sin(theta), -1.0});
        }
      }
      break;
    }
    case ShapeFamily::kTorus: {
      // Area element is proportional to (R + r cos phi); rejection on phi.
      for (std::size_t i = 0; i < n; ++i) {
        double phi = 0.0;
        do {
          phi = kTwoPi * uniform01(rng);
        } while (uniform01(rng) * (kTorusMajor + kTorusMinor) > kTorusMajor + kTorusMinor * std::cos(phi));
        const double theta = kTwoPi * uniform01(rng);
        const double ring = kTorusMajor + kTorusMinor * std::cos(phi);
        pts.push_back({ring * std::cos(theta), ring * std::sin(theta), kTorusMinor * std::sin(phi)});
      }
      break;
    }
  }
  return pts;
}

}  // namespace synth

/// Surface samples -> isotropic jitter -> unit-sphere normalization ->
/// optional uniform random rotation. Deterministic in spec.seed.
inline PointCloud generate(const ShapeSpec& spec) {
  if (spec.n_points < 64) throw InvalidArgument("generate: n_points must be >= 64");
  if (spec.jitter_sigma < 0.0 || spec.jitter_sigma > 0.05) {
    throw InvalidArgument("generate: jitter_sigma must lie in [0, 0.05]");
  }
  Rng rng(spec.seed);
  PointCloud cloud;
  cloud.points = synth::surface(spec.family, spec.n_points, rng);
  if (spec.jitter_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.jitter_sigma);
    for (auto& p : cloud.points) {
      for (double& v : p) v += noise(rng);
    }
  }
  cloud = normalize_unit_sphere(std::move(cloud));
  if (spec.random_rotation) {
    const double u1 = uniform01(rng), u2 = uniform01(rng), u3 = uniform01(rng);
    const Mat3 r = uniform_rotation(u1, u2, u3);
    for (auto& p : cloud.points) p = rotate(r, p);
  }
  cloud.label = static_cast<int>(spec.family);
  cloud.source_id = to_string(spec.family);
  return cloud;
}

/// clouds_per_family clouds of each family; the label is the family's index in
/// kAllFamilies and each cloud's seed is derived from (seed, family, index).
inline std::vector<PointCloud> generate_dataset(std::span<const ShapeFamily> families, std::size_t clouds_per_family,
                                                const ShapeSpec& tmpl, std::uint64_t seed) {
  std::vector<PointCloud> out;
  out.reserve(families.size() * clouds_per_family);
  for (auto fam : families) {
    for (std::size_t i = 0; i < clouds_per_family; ++i) {
      ShapeSpec spec = tmpl;
      spec.family = fam;
      spec.seed = derive_seed(seed, stream::kSynth + static_cast<std::uint64_t>(fam) * 16, i);
      PointCloud c = generate(spec);
      c.source_id = to_string(fam) + "_" + std::to_string(i);
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace gprnet
