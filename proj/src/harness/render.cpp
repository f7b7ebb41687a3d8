#include "sym3d/harness/render.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

namespace sym3d::harness {

std::size_t GrayImage::count_nonzero() const {
  return static_cast<std::size_t>(std::count_if(pixels.begin(), pixels.end(), [](std::uint8_t v) { return v != 0; }));
}

GrayImage GrayImage::mirrored_horizontally() const {
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out.at(x, y) = at(width - 1 - x, y);
  return out;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("write_pgm: cannot open " + path.string());
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!os) throw IoError("write_pgm: write failed for " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_pgm: cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  if (!(is >> magic >> w >> h >> maxval) || magic != "P5" || w <= 0 || h <= 0 || maxval != 255) {
    throw FormatError("read_pgm: unsupported header in " + path.string());
  }
  is.get();
  GrayImage img(w, h);
  is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (is.gcount() != static_cast<std::streamsize>(img.pixels.size())) throw FormatError("read_pgm: truncated");
  return img;
}

GrayImage render_silhouette(const TriMesh& mesh, double azimuth_deg, double elevation_deg, int resolution,
                            double extent) {
  if (resolution < 1) throw InvalidInput("render_silhouette: resolution must be >= 1");
  GrayImage img(resolution, resolution);
  if (mesh.empty()) return img;

  const double az = azimuth_deg * std::numbers::pi / 180.0;
  const double el = elevation_deg * std::numbers::pi / 180.0;
  const Vec3 view(std::cos(el) * std::cos(az), std::sin(el), std::cos(el) * std::sin(az));
  // Y x view, normalized; written out so it stays defined at +-90 elevation.
  const Vec3 right(std::sin(az), 0.0, -std::cos(az));
  const Vec3 up = view.cross(right);

  std::vector<double> depth(img.pixels.size(), -std::numeric_limits<double>::infinity());
  const double pixel = 2.0 * extent / resolution;
  const auto to_pixel_x = [&](double s) { return (s + extent) / pixel - 0.5; };
  const auto to_pixel_y = [&](double t) { return (extent - t) / pixel - 0.5; };

  for (const auto& tri : mesh.triangles) {
    std::array<Eigen::Vector2d, 3> q;
    std::array<double, 3> z{};
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = mesh.vertices[tri[k]];
      q[k] = {p.dot(right), p.dot(up)};
      z[k] = p.dot(view);
    }
    const double area = (q[1] - q[0]).x() * (q[2] - q[0]).y() - (q[1] - q[0]).y() * (q[2] - q[0]).x();
    if (area == 0.0) continue;

    const double xmin = std::min({q[0].x(), q[1].x(), q[2].x()});
    const double xmax = std::max({q[0].x(), q[1].x(), q[2].x()});
    const double ymin = std::min({q[0].y(), q[1].y(), q[2].y()});
    const double ymax = std::max({q[0].y(), q[1].y(), q[2].y()});
    const int x0 = std::max(0, static_cast<int>(std::ceil(to_pixel_x(xmin))));
    const int x1 = std::min(resolution - 1, static_cast<int>(std::floor(to_pixel_x(xmax))));
    const int y0 = std::max(0, static_cast<int>(std::ceil(to_pixel_y(ymax))));
    const int y1 = std::min(resolution - 1, static_cast<int>(std::floor(to_pixel_y(ymin))));

    for (int py = y0; py <= y1; ++py) {
      const double t = extent - (py + 0.5) * pixel;
      for (int px = x0; px <= x1; ++px) {
        const double s = -extent + (px + 0.5) * pixel;
        std::array<double, 3> w{};
        for (int k = 0; k < 3; ++k) {
          const auto& a = q[(k + 1) % 3];
          const auto& b = q[(k + 2) % 3];
          w[k] = ((b.x() - a.x()) * (t - a.y()) - (b.y() - a.y()) * (s - a.x())) / area;
        }
        if (w[0] < 0 || w[1] < 0 || w[2] < 0) continue;
        const double d = w[0] * z[0] + w[1] * z[1] + w[2] * z[2];
        const std::size_t idx = static_cast<std::size_t>(py) * resolution + px;
        if (d > depth[idx]) {
          depth[idx] = d;
          img.pixels[idx] = 255;
        }
      }
    }
  }
  return img;
}

GrayImage grayscale(const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& values) {
  GrayImage img(static_cast<int>(values.cols()), static_cast<int>(values.rows()));
  if (values.size() == 0) return img;
  const double lo = values.minCoeff(), hi = values.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  for (Index r = 0; r < values.rows(); ++r)
    for (Index c = 0; c < values.cols(); ++c)
      img.at(static_cast<int>(c), static_cast<int>(r)) =
          static_cast<std::uint8_t>(std::lround(255.0 * (values(r, c) - lo) / span));
  return img;
}

}  // namespace sym3d::harness
