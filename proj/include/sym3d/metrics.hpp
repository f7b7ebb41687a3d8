#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sym3d/dmtet.hpp"

namespace sym3d {

enum class CloudProvenance : std::uint8_t { SampledFromMesh, Analytic, File };

/// Points are columns.
struct PointCloud {
  Points3<double> points;
  CloudProvenance provenance = CloudProvenance::Analytic;

  Index size() const { return points.cols(); }
  bool empty() const { return points.cols() == 0; }
};

/// For every column of `query`, the squared distance to the nearest column of
/// `target` (exact brute force).
VectorX<double> nearest_squared_distances(const Points3<double>& query, const Points3<double>& target);

/// mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2.
double chamfer(const PointCloud& a, const PointCloud& b);

/// Fraction of references that are the chamfer-nearest reference of at least
/// one generated cloud (lowest index wins ties).
double coverage(std::span<const PointCloud> gen, std::span<const PointCloud> ref);

/// Mean over references of the smallest chamfer to any generated cloud.
double mmd(std::span<const PointCloud> gen, std::span<const PointCloud> ref);

/// Area-weighted uniform surface samples, deterministic in `seed`.
PointCloud sample_mesh_surface(const TriMesh& mesh, Index n, std::uint64_t seed);

/// One "x y z" triple per line.
void write_point_cloud(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_point_cloud(const std::filesystem::path& path);

/// Uniform double in [0,1) from the top 53 bits of a 64-bit engine draw, so
/// sampling does not depend on the standard library's distributions.
template <typename Engine>
double unit_uniform(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace sym3d
