#pragma once

#include <string_view>

#include "sym3d/common.hpp"

namespace sym3d::harness {

/// Azimuth range [begin, end) in degrees of the cameras that observed the
/// object, plus whether mirrored views were added.
struct VisibilitySpec {
  double begin_deg = 0.0;
  double end_deg = 360.0;
  bool mirror_augment = false;

  void validate() const;
};

/// Parses "A:B".
VisibilitySpec parse_azimuth_range(std::string_view text);

/// Azimuth atan2(z, x) in degrees mapped to [0, 360).
double azimuth_deg(const Vec3& p);

/// True iff p's azimuth lies in the camera range dilated by +-90 degrees
/// (or, with mirror_augment, its z-mirror does). Points on the y axis are
/// always visible.
bool visible(const Vec3& p, const VisibilitySpec& v);

}  // namespace sym3d::harness
