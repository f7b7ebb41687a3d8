#include "sym3d/harness/shapes.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <random>

namespace sym3d::harness {

ShapeKind parse_shape(std::string_view name) {
  if (name == "sphere") return ShapeKind::Sphere;
  if (name == "capsule-chair" || name == "chair") return ShapeKind::CapsuleChair;
  if (name == "winged") return ShapeKind::Winged;
  throw InvalidInput("unknown shape '" + std::string(name) + "' (sphere, capsule-chair, winged)");
}

std::string_view shape_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Sphere:
      return "sphere";
    case ShapeKind::CapsuleChair:
      return "capsule-chair";
    case ShapeKind::Winged:
      return "winged";
  }
  return "?";
}

TargetShape::TargetShape(ShapeKind kind) : kind_(kind) {
  switch (kind) {
    case ShapeKind::Sphere:
      break;
    case ShapeKind::CapsuleChair:
      // seat, back, four legs; legs and back overlap the seat so no faces
      // coincide inside the solid
      boxes_ = {
          {{0.0, 0.0, 0.0}, {0.45, 0.06, 0.45}},
          {{-0.39, 0.36, 0.0}, {0.06, 0.36, 0.45}},
          {{0.37, -0.35, 0.37}, {0.05, 0.33, 0.05}},
          {{0.37, -0.35, -0.37}, {0.05, 0.33, 0.05}},
          {{-0.37, -0.35, 0.37}, {0.05, 0.33, 0.05}},
          {{-0.37, -0.35, -0.37}, {0.05, 0.33, 0.05}},
      };
      break;
    case ShapeKind::Winged:
      // fuselage, swept-back wings, fin, tail stabilizers
      boxes_ = {
          {{0.0, 0.0, 0.0}, {0.65, 0.1, 0.1}},
          {{-0.12, 0.0, 0.4}, {0.16, 0.05, 0.32}},
          {{-0.12, 0.0, -0.4}, {0.16, 0.05, 0.32}},
          {{-0.55, 0.2, 0.0}, {0.08, 0.14, 0.03}},
          {{-0.58, 0.03, 0.18}, {0.06, 0.03, 0.12}},
          {{-0.58, 0.03, -0.18}, {0.06, 0.03, 0.12}},
      };
      break;
  }
}

double TargetShape::sdf(const Vec3& p) const {
  if (kind_ == ShapeKind::Sphere) return p.norm() - radius_;
  double d = std::numeric_limits<double>::infinity();
  for (const auto& b : boxes_) d = std::min(d, b.sdf(p));
  return d;
}

Vec3 TargetShape::color(const Vec3& p) {
  return {0.5 + 0.35 * std::sin(2.5 * p.x()), 0.5 + 0.35 * std::cos(3.0 * p.y()),
          0.5 + 0.35 * std::cos(4.0 * p.z())};
}

PointCloud TargetShape::sample_surface(Index n, std::uint64_t seed) const {
  if (n < 1) throw InvalidInput("sample_surface: sample count must be >= 1");
  std::mt19937_64 rng(seed);
  PointCloud cloud{Points3<double>(3, n), CloudProvenance::Analytic};

  if (kind_ == ShapeKind::Sphere) {
    for (Index k = 0; k < n; ++k) {
      const double z = 2.0 * unit_uniform(rng) - 1.0;
      const double phi = 2.0 * std::numbers::pi * unit_uniform(rng);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      cloud.points.col(k) = radius_ * Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }
    return cloud;
  }

  // Area-weighted face pick, rejecting points that lie inside another box.
  struct Face {
    std::size_t box;
    int axis;
    double sign;
    double area;
  };
  std::vector<Face> faces;
  std::vector<double> cumulative;
  double total = 0;
  for (std::size_t b = 0; b < boxes_.size(); ++b) {
    for (int axis = 0; axis < 3; ++axis) {
      const Vec3& h = boxes_[b].half;
      const double area = 4.0 * h[(axis + 1) % 3] * h[(axis + 2) % 3];
      for (double sign : {-1.0, 1.0}) {
        faces.push_back({b, axis, sign, area});
        total += area;
        cumulative.push_back(total);
      }
    }
  }

  Index k = 0;
  while (k < n) {
    const double pick = unit_uniform(rng) * total;
    std::size_t f = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                             cumulative.begin());
    if (f >= faces.size()) f = faces.size() - 1;
    const Face& face = faces[f];
    const Box& box = boxes_[face.box];
    Vec3 p;
    p[face.axis] = box.center[face.axis] + face.sign * box.half[face.axis];
    for (int d = 1; d <= 2; ++d) {
      const int a = (face.axis + d) % 3;
      p[a] = box.center[a] + (2.0 * unit_uniform(rng) - 1.0) * box.half[a];
    }
    bool covered = false;
    for (std::size_t b = 0; b < boxes_.size() && !covered; ++b) {
      if (b != face.box && boxes_[b].sdf(p) < 0.0) covered = true;
    }
    if (covered) continue;
    cloud.points.col(k++) = p;
  }
  return cloud;
}

}  // namespace sym3d::harness
