#include <gtest/gtest.h>

#include <vector>

#include "sym3d/regularizers.hpp"
#include "test_support.hpp"

using namespace sym3d;
using sym3d::testing::central_difference;
using sym3d::testing::random_plane;
using sym3d::testing::random_triplane;
using sym3d::testing::relative_error;
using sym3d::testing::symmetrize;

TEST(FeatureSymmetryLoss, ZeroOnSymmetricPlanes) {
  std::mt19937_64 rng(1);
  auto g = random_triplane<GeometryTag>(7, 3, rng);
  symmetrize(g.xz);
  symmetrize(g.yz);
  const auto r = feature_symmetry_loss(g);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.yz, 0.0);
  EXPECT_EQ(r.xz, 0.0);
}

TEST(FeatureSymmetryLoss, MirroredPairHandValue) {
  GeometryTriplane<double> g(5, 1);
  g.yz(2, 1, 0) = 1.0;  // its mirror (2, 3) holds 0
  const auto r = feature_symmetry_loss(g);
  EXPECT_EQ(r.yz, 2.0);
  EXPECT_EQ(r.xz, 0.0);
  EXPECT_EQ(r.value, 2.0);
}

TEST(FeatureSymmetryLoss, PositiveOffSymmetricSubspace) {
  std::mt19937_64 rng(2);
  const auto g = random_triplane<GeometryTag>(6, 2, rng);
  const auto r = feature_symmetry_loss(g);
  EXPECT_GT(r.yz, 0.0);
  EXPECT_GT(r.xz, 0.0);
  EXPECT_EQ(r.value, r.yz + r.xz);
}

TEST(FeatureSymmetryLoss, IgnoresXyPlane) {
  std::mt19937_64 rng(3);
  GeometryTriplane<double> g(6, 2);
  g.xy = random_plane(6, 2, Axis::X, Axis::Y, rng);
  EXPECT_EQ(feature_symmetry_loss(g).value, 0.0);
}

TEST(FeatureSymmetryLoss, InvariantUnderFlip) {
  std::mt19937_64 rng(4);
  const auto g = random_triplane<GeometryTag>(6, 2, rng);
  const GeometryTriplane<double> f(g.xy, flip_z(g.xz), flip_z(g.yz));
  EXPECT_EQ(feature_symmetry_loss(g).value, feature_symmetry_loss(f).value);
}

TEST(FeatureSymmetryBackward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = random_triplane<GeometryTag>(6, 3, rng);
    const auto f = [&] { return feature_symmetry_loss(g).value; };
    auto grad = g.zeros_like();
    feature_symmetry_backward(g, 1.0, grad);
    EXPECT_EQ(grad.xy.data().squaredNorm(), 0.0);
    for (int k = 1; k < 3; ++k) {
      auto* p = g.planes()[k];
      EXPECT_LE(relative_error(grad.planes()[k]->data(), central_difference(f, p->data().data(), p->size())), 1e-6);
    }
  }
}

TEST(FeatureSymmetryBackward, ZeroAtSymmetricPoint) {
  std::mt19937_64 rng(6);
  auto g = random_triplane<GeometryTag>(6, 2, rng);
  symmetrize(g.xz);
  symmetrize(g.yz);
  auto grad = g.zeros_like();
  feature_symmetry_backward(g, 3.0, grad);
  for (const auto* p : grad.planes()) EXPECT_EQ(p->data().squaredNorm(), 0.0);
}

TEST(FeatureSymmetryBackward, GradientStepDecreasesLoss) {
  std::mt19937_64 rng(7);
  auto g = random_triplane<GeometryTag>(6, 2, rng);
  const double before = feature_symmetry_loss(g).value;
  auto grad = g.zeros_like();
  feature_symmetry_backward(g, 1.0, grad);
  g.xz.data() -= 1e-3 * grad.xz.data();
  g.yz.data() -= 1e-3 * grad.yz.data();
  EXPECT_LT(feature_symmetry_loss(g).value, before);
}

TEST(AttentionSymmetryLoss, HalfMapsGiveZero) {
  const auto half = [](Axis a) {
    return AttentionMap<double>{FeaturePlane<double>(6, 1, a, Axis::Z, VectorX<double>::Constant(36, 0.5))};
  };
  EXPECT_EQ(attention_symmetry_loss(half(Axis::Y), half(Axis::X)).value, 0.0);
}

TEST(AttentionSymmetryLoss, MirroredPairHandValue) {
  AttentionMap<double> yz{FeaturePlane<double>(5, 1, Axis::Y, Axis::Z, VectorX<double>::Constant(25, 0.5))};
  AttentionMap<double> xz{FeaturePlane<double>(5, 1, Axis::X, Axis::Z, VectorX<double>::Constant(25, 0.5))};
  yz.values(1, 0, 0) = 0.9;
  yz.values(1, 4, 0) = 0.1;
  const auto r = attention_symmetry_loss(yz, xz);
  EXPECT_NEAR(r.value, 1.28, 1e-15);
  EXPECT_EQ(r.xz, 0.0);
}

TEST(AttentionSymmetryLoss, KernelGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    const auto g = random_triplane<GeometryTag>(8, 3, rng);
    auto m = VsaModule<double>::random(rng);
    const auto f = [&] {
      const auto out = attend_triplane(m, g);
      return attention_symmetry_loss(out.yz, out.xz).value;
    };
    const auto out = attend_triplane(m, g);
    const auto [dyz, dxz] = attention_symmetry_backward(out.yz, out.xz, 1.0);
    const auto grads = vsa_backward<double>(m, g, nullptr, {nullptr, &dxz, &dyz});
    EXPECT_EQ(grads.kernels.xy.weights.squaredNorm(), 0.0);
    for (int k = 1; k < 3; ++k) {
      auto* kernel = m.kernels()[k];
      EXPECT_LE(relative_error(grads.kernels.kernels()[k]->weights, central_difference(f, kernel->weights.data(), 98)),
                1e-5)
          << trial << " kernel " << k;
    }
  }
}

TEST(MultiscaleFeatureSymmetryLoss, SingleAndRepeatedScales) {
  std::mt19937_64 rng(9);
  const auto g = random_triplane<GeometryTag>(6, 2, rng);
  const std::vector<GeometryTriplane<double>> one{g}, two{g, g};
  EXPECT_EQ(multiscale_feature_symmetry_loss<double>(one).value, feature_symmetry_loss(g).value);
  EXPECT_EQ(multiscale_feature_symmetry_loss<double>(two).value, 2.0 * feature_symmetry_loss(g).value);
  EXPECT_THROW(multiscale_feature_symmetry_loss<double>(std::span<const GeometryTriplane<double>>{}), InvalidInput);
}

TEST(MultiscaleFeatureSymmetryLoss, MatchesScalarLoopOracle) {
  std::mt19937_64 rng(10);
  std::vector<GeometryTriplane<double>> scales;
  for (Index n : {4, 8, 16}) scales.push_back(random_triplane<GeometryTag>(n, 3, rng));
  double expected = 0;
  for (const auto& g : scales)
    for (const auto* p : {&g.yz, &g.xz}) {
      const Index n = p->resolution();
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          for (Index c = 0; c < p->channels(); ++c) {
            const double d = (*p)(i, j, c) - (*p)(i, n - 1 - j, c);
            expected += d * d;
          }
    }
  EXPECT_NEAR(multiscale_feature_symmetry_loss<double>(scales).value, expected, 1e-12 * expected);
}
