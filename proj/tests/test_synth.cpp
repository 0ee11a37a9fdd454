#include <gtest/gtest.h>

#include "gprnet/synth.hpp"
#include "oracles.hpp"

using namespace gprnet;

TEST(Generate, SphereNormsAreOne) {
  const auto c = generate({ShapeFamily::kSphere, 2048, 0.0, false, 3});
  ASSERT_EQ(c.size(), 2048u);
  for (const auto& p : c.points) EXPECT_NEAR(norm(p), 1.0, 1e-9);
}

// Recompute the normalization independently from the raw surface samples and
// check every output point sits on one of the four transformed face planes.
TEST(Generate, TetrahedronPointsOnFacePlanes) {
  const ShapeSpec spec{ShapeFamily::kTetrahedron, 2048, 0.0, false, 17};
  const auto cloud = generate(spec);
  Rng rng(spec.seed);
  const auto raw = synth::surface(spec.family, spec.n_points, rng);
  Vec3 center{0, 0, 0};
  for (const auto& p : raw) center = center + p;
  center = (1.0 / static_cast<double>(raw.size())) * center;
  double scale = 0.0;
  for (const auto& p : raw) scale = std::max(scale, norm(p - center));

  const auto mesh = synth::tetrahedron_mesh();
  std::vector<Vec3> v;
  for (const auto& x : mesh.vertices) v.push_back((1.0 / scale) * (x - center));
  for (const auto& p : cloud.points) {
    double best = 1e9;
    for (const auto& f : mesh.faces) {
      const Vec3 n = normalized_or_zero(cross(v[f[1]] - v[f[0]], v[f[2]] - v[f[0]]));
      best = std::min(best, std::abs(dot(p - v[f[0]], n)));
    }
    EXPECT_LT(best, 1e-9);
  }
}

TEST(Generate, DeterministicAndNormalized) {
  for (auto fam : kAllFamilies) {
    const ShapeSpec spec{fam, 256, 0.02, true, 5};
    const auto a = generate(spec);
    EXPECT_EQ(a.points, generate(spec).points) << to_string(fam);
    EXPECT_EQ(a.label, static_cast<int>(fam));
    double max_norm = 0.0;
    for (const auto& p : a.points) max_norm = std::max(max_norm, norm(p));
    EXPECT_NEAR(max_norm, 1.0, 1e-12);
  }
}

TEST(Generate, InvalidSpecs) {
  EXPECT_THROW(generate({ShapeFamily::kCube, 32, 0.0, false, 0}), InvalidArgument);
  EXPECT_THROW(generate({ShapeFamily::kCube, 128, 0.1, false, 0}), InvalidArgument);
  EXPECT_THROW(parse_family("dodecahedron"), InvalidArgument);
  for (auto fam : kAllFamilies) EXPECT_EQ(parse_family(to_string(fam)), fam);
}

TEST(Generate, SurfacesLieOnTheirShapes) {
  Rng rng(1);
  for (const auto& p : synth::surface(ShapeFamily::kCylinder, 500, rng)) {
    const double r = std::hypot(p[0], p[1]);
    EXPECT_TRUE(std::abs(r - 1.0) < 1e-12 || std::abs(std::abs(p[2]) - 1.0) < 1e-12);
  }
  for (const auto& p : synth::surface(ShapeFamily::kCone, 500, rng)) {
    const double r = std::hypot(p[0], p[1]);
    EXPECT_TRUE(std::abs(p[2] - (1.0 - 2.0 * r)) < 1e-12 || std::abs(p[2] + 1.0) < 1e-12);
  }
  for (const auto& p : synth::surface(ShapeFamily::kTorus, 500, rng)) {
    const double ring = std::hypot(p[0], p[1]) - synth::kTorusMajor;
    EXPECT_NEAR(std::hypot(ring, p[2]), synth::kTorusMinor, 1e-12);
  }
  for (const auto& p : synth::surface(ShapeFamily::kCube, 500, rng)) {
    EXPECT_NEAR(std::max({std::abs(p[0]), std::abs(p[1]), std::abs(p[2])}), 1.0, 1e-12);
  }
  for (const auto& p : synth::surface(ShapeFamily::kPlane, 500, rng)) EXPECT_EQ(p[2], 0.0);
}

TEST(GenerateDataset, CountsLabelsAndSeeds) {
  const ShapeSpec tmpl{ShapeFamily::kSphere, 64, 0.01, false, 0};
  const auto ds = generate_dataset(kAllFamilies, 40, tmpl, 7);
  ASSERT_EQ(ds.size(), 280u);
  std::map<int, int> per_label;
  for (const auto& c : ds) ++per_label[*c.label];
  EXPECT_EQ(per_label.size(), 7u);
  for (const auto& [label, n] : per_label) EXPECT_EQ(n, 40);
  EXPECT_NE(ds[0].points, ds[1].points);
  EXPECT_EQ(ds[0].source_id, "sphere_0");
  EXPECT_EQ(generate_dataset(kAllFamilies, 2, tmpl, 7)[1].points, ds[1].points);
}
