#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sym3d/metrics.hpp"

namespace sym3d::harness {

enum class ShapeKind { Sphere, CapsuleChair, Winged };

ShapeKind parse_shape(std::string_view name);
std::string_view shape_name(ShapeKind kind);

struct Box {
  Vec3 center;
  Vec3 half;

  double sdf(const Vec3& p) const {
    const Vec3 q = (p - center).cwiseAbs() - half;
    return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
  }
};

/// Analytic stand-in for a symmetric object category. Every shape is exactly
/// symmetric under z -> -z, and so is its color field.
class TargetShape {
 public:
  explicit TargetShape(ShapeKind kind);

  ShapeKind kind() const { return kind_; }
  std::string_view name() const { return shape_name(kind_); }

  /// Signed distance, negative inside. Exact for the sphere; min of exact
  /// box distances for the box unions (1-Lipschitz).
  double sdf(const Vec3& p) const;

  /// Smooth color field, even in z.
  static Vec3 color(const Vec3& p);

  /// Uniform samples on the exterior surface, deterministic in `seed`.
  PointCloud sample_surface(Index n, std::uint64_t seed) const;

  const std::vector<Box>& boxes() const { return boxes_; }

 private:
  ShapeKind kind_;
  double radius_ = 0.5;
  std::vector<Box> boxes_;
};

}  // namespace sym3d::harness
