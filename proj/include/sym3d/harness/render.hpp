#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sym3d/dmtet.hpp"

namespace sym3d::harness {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first

  GrayImage() = default;
  GrayImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  std::size_t count_nonzero() const;
  GrayImage mirrored_horizontally() const;
};

/// Binary P5 (255 = foreground).
void write_pgm(const GrayImage& img, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

/// Orthographic silhouette seen from the camera direction
/// (cos e cos a, sin e, cos e sin a); azimuth follows atan2(z, x) like the
/// visibility ranges. The image covers [-extent, extent]^2 of the view plane
/// and a pixel is foreground when some triangle covers its center (z-buffered).
GrayImage render_silhouette(const TriMesh& mesh, double azimuth_deg, double elevation_deg, int resolution,
                            double extent = 1.1);

/// Linear map of a scalar field to 0..255 over its own [min, max].
GrayImage grayscale(const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& values);

}  // namespace sym3d::harness
