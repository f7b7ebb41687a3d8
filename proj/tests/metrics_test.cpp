#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "sym3d/metrics.hpp"
#include "test_support.hpp"

using namespace sym3d;
using sym3d::testing::brute_chamfer;
using sym3d::testing::brute_coverage;
using sym3d::testing::brute_mmd;
using sym3d::testing::random_cloud;

namespace {

PointCloud single(double x, double y, double z) {
  PointCloud c{Points3<double>(3, 1), CloudProvenance::Analytic};
  c.points.col(0) = Vec3(x, y, z);
  return c;
}

TriMesh two_triangles() {
  // areas 4.5 and 0.5
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(0, 3, 0), Vec3(5, 0, 1), Vec3(6, 0, 1), Vec3(5, 1, 1)};
  m.triangles = {{0, 1, 2}, {3, 4, 5}};
  return m;
}

}  // namespace

TEST(Chamfer, HandValues) {
  EXPECT_EQ(chamfer(single(0, 0, 0), single(1, 0, 0)), 2.0);
  std::mt19937_64 rng(1);
  const auto a = random_cloud(30, rng);
  EXPECT_EQ(chamfer(a, a), 0.0);
  EXPECT_THROW(chamfer(a, PointCloud{}), InvalidInput);
}

TEST(Chamfer, MatchesBruteForce) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_cloud(50, rng);
    const auto b = random_cloud(37 + trial, rng);
    EXPECT_NEAR(chamfer(a, b), brute_chamfer(a, b), 1e-12);
    EXPECT_NEAR(chamfer(a, b), chamfer(b, a), 1e-15);
  }
}

TEST(Coverage, HandValues) {
  std::mt19937_64 rng(3);
  std::vector<PointCloud> ref;
  for (int k = 0; k < 3; ++k) ref.push_back(random_cloud(20, rng));
  EXPECT_EQ(coverage(ref, ref), 1.0);
  const std::vector<PointCloud> one{random_cloud(20, rng)};
  EXPECT_DOUBLE_EQ(coverage(one, ref), 1.0 / 3.0);
  EXPECT_THROW(coverage(std::vector<PointCloud>{}, ref), InvalidInput);
}

TEST(Coverage, MatchesBruteForce) {
  std::mt19937_64 rng(4);
  std::vector<PointCloud> gen, ref;
  for (int k = 0; k < 5; ++k) gen.push_back(random_cloud(25, rng));
  for (int k = 0; k < 4; ++k) ref.push_back(random_cloud(25, rng));
  EXPECT_EQ(coverage(gen, ref), brute_coverage(gen, ref));
}

TEST(Mmd, HandValues) {
  std::mt19937_64 rng(5);
  std::vector<PointCloud> ref;
  for (int k = 0; k < 4; ++k) ref.push_back(random_cloud(15, rng));
  EXPECT_EQ(mmd(ref, ref), 0.0);
  const std::vector<PointCloud> one{random_cloud(15, rng)};
  double mean = 0;
  for (const auto& r : ref) mean += chamfer(one[0], r);
  EXPECT_NEAR(mmd(one, ref), mean / 4.0, 1e-15);
}

TEST(Mmd, MatchesBruteForce) {
  std::mt19937_64 rng(6);
  std::vector<PointCloud> gen, ref;
  for (int k = 0; k < 8; ++k) gen.push_back(random_cloud(40, rng));
  for (int k = 0; k < 6; ++k) ref.push_back(random_cloud(40, rng));
  EXPECT_NEAR(mmd(gen, ref), brute_mmd(gen, ref), 1e-12);
}

TEST(SampleMeshSurface, PointsStayInsideSingleTriangle) {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}};
  const auto c = sample_mesh_surface(m, 2000, 7);
  for (Index k = 0; k < c.size(); ++k) {
    EXPECT_GE(c.points(0, k), 0.0);
    EXPECT_GE(c.points(1, k), 0.0);
    EXPECT_LE(c.points(0, k) + c.points(1, k), 1.0 + 1e-15);
    EXPECT_EQ(c.points(2, k), 0.0);
  }
  EXPECT_EQ(c.provenance, CloudProvenance::SampledFromMesh);
}

TEST(SampleMeshSurface, AreaWeightedCounts) {
  const auto c = sample_mesh_surface(two_triangles(), 10000, 8);
  Index small = 0;
  for (Index k = 0; k < c.size(); ++k) small += c.points(2, k) == 1.0;
  // binomial(10000, 0.1): sigma = 30
  EXPECT_NEAR(static_cast<double>(small), 1000.0, 3.0 * std::sqrt(10000 * 0.1 * 0.9));
}

TEST(SampleMeshSurface, DeterministicInSeed) {
  const auto a = sample_mesh_surface(two_triangles(), 500, 9);
  const auto b = sample_mesh_surface(two_triangles(), 500, 9);
  const auto c = sample_mesh_surface(two_triangles(), 500, 10);
  EXPECT_EQ(a.points, b.points);
  EXPECT_NE(a.points, c.points);
  EXPECT_THROW(sample_mesh_surface(TriMesh{}, 10, 0), InvalidInput);
}

TEST(PointCloudFile, RoundTrip) {
  std::mt19937_64 rng(11);
  const auto a = random_cloud(64, rng);
  const auto p = std::filesystem::temp_directory_path() / "sym3d_metrics_cloud.xyz";
  write_point_cloud(a, p);
  const auto b = read_point_cloud(p);
  EXPECT_EQ(b.points, a.points);
  EXPECT_EQ(b.provenance, CloudProvenance::File);
  std::filesystem::remove(p);
}
