#include "sym3d/harness/visibility.hpp"

#include <numbers>
#include <string>

namespace sym3d::harness {

namespace {

constexpr double kDilationDeg = 90.0;

double wrap360(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0) r += 360.0;
  return r >= 360.0 ? 0.0 : r;
}

bool in_dilated_range(double theta, const VisibilitySpec& v) {
  const double width = (v.end_deg - v.begin_deg) + 2.0 * kDilationDeg;
  if (width >= 360.0) return true;
  return wrap360(theta - (v.begin_deg - kDilationDeg)) < width;
}

}  // namespace

void VisibilitySpec::validate() const {
  if (!std::isfinite(begin_deg) || !std::isfinite(end_deg) || begin_deg < 0.0 || end_deg > 360.0 ||
      !(end_deg > begin_deg)) {
    throw InvalidInput("visibility range must satisfy 0 <= begin < end <= 360");
  }
}

VisibilitySpec parse_azimuth_range(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw InvalidInput("azimuth range must look like A:B");
  const auto parse = [](std::string_view s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(s), &used);
      if (used != s.size()) throw InvalidInput("bad number in azimuth range");
      return v;
    } catch (const std::logic_error&) {
      throw InvalidInput("bad number in azimuth range: '" + std::string(s) + "'");
    }
  };
  VisibilitySpec v;
  v.begin_deg = parse(text.substr(0, colon));
  v.end_deg = parse(text.substr(colon + 1));
  v.validate();
  return v;
}

double azimuth_deg(const Vec3& p) {
  return wrap360(std::atan2(p.z(), p.x()) * 180.0 / std::numbers::pi);
}

bool visible(const Vec3& p, const VisibilitySpec& v) {
  if (p.x() == 0.0 && p.z() == 0.0) return true;
  const double theta = azimuth_deg(p);
  if (in_dilated_range(theta, v)) return true;
  return v.mirror_augment && in_dilated_range(wrap360(-theta), v);
}

}  // namespace sym3d::harness
