#include "sym3d/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace sym3d {

VectorX<double> nearest_squared_distances(const Points3<double>& query, const Points3<double>& target) {
  if (target.cols() == 0) throw InvalidInput("nearest_squared_distances: empty target");
  VectorX<double> best(query.cols());
  for (Index q = 0; q < query.cols(); ++q) {
    double d = std::numeric_limits<double>::infinity();
    const Vec3 p = query.col(q);
    for (Index t = 0; t < target.cols(); ++t) d = std::min(d, (target.col(t) - p).squaredNorm());
    best[q] = d;
  }
  return best;
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw InvalidInput("chamfer: empty point cloud");
  return nearest_squared_distances(a.points, b.points).mean() +
         nearest_squared_distances(b.points, a.points).mean();
}

namespace {

MatrixX<double> chamfer_table(std::span<const PointCloud> gen, std::span<const PointCloud> ref) {
  if (gen.empty() || ref.empty()) throw InvalidInput("coverage/mmd: empty cloud list");
  MatrixX<double> d(static_cast<Index>(gen.size()), static_cast<Index>(ref.size()));
  for (std::size_t g = 0; g < gen.size(); ++g)
    for (std::size_t r = 0; r < ref.size(); ++r) d(Index(g), Index(r)) = chamfer(gen[g], ref[r]);
  return d;
}

}  // namespace

double coverage(std::span<const PointCloud> gen, std::span<const PointCloud> ref) {
  const MatrixX<double> d = chamfer_table(gen, ref);
  std::set<Index> matched;
  for (Index g = 0; g < d.rows(); ++g) {
    Index best = 0;
    for (Index r = 1; r < d.cols(); ++r)
      if (d(g, r) < d(g, best)) best = r;
    matched.insert(best);
  }
  return static_cast<double>(matched.size()) / static_cast<double>(ref.size());
}

double mmd(std::span<const PointCloud> gen, std::span<const PointCloud> ref) {
  return chamfer_table(gen, ref).colwise().minCoeff().mean();
}

PointCloud sample_mesh_surface(const TriMesh& mesh, Index n, std::uint64_t seed) {
  if (mesh.empty()) throw InvalidInput("sample_mesh_surface: empty mesh");
  if (n < 1) throw InvalidInput("sample_mesh_surface: sample count must be >= 1");
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    total += triangle_area(mesh, t);
    cumulative[t] = total;
  }
  if (!(total > 0)) throw InvalidInput("sample_mesh_surface: mesh has zero area");

  std::mt19937_64 rng(seed);
  PointCloud cloud{Points3<double>(3, n), CloudProvenance::SampledFromMesh};
  for (Index k = 0; k < n; ++k) {
    const double pick = unit_uniform(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto& tri = mesh.triangles[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(unit_uniform(rng));
    const double r2 = unit_uniform(rng);
    cloud.points.col(k) = (1 - r1) * mesh.vertices[tri[0]] + r1 * (1 - r2) * mesh.vertices[tri[1]] +
                          r1 * r2 * mesh.vertices[tri[2]];
  }
  return cloud;
}

void write_point_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("write_point_cloud: cannot open " + path.string());
  os << std::setprecision(17);
  for (Index k = 0; k < cloud.size(); ++k) {
    os << cloud.points(0, k) << ' ' << cloud.points(1, k) << ' ' << cloud.points(2, k) << '\n';
  }
  if (!os) throw IoError("write_point_cloud: write failed for " + path.string());
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_point_cloud: cannot open " + path.string());
  std::vector<Vec3> pts;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x() >> p.y() >> p.z())) throw FormatError("read_point_cloud: bad line: " + line);
    if (!p.allFinite()) throw FormatError("read_point_cloud: non-finite coordinate");
    pts.push_back(p);
  }
  PointCloud cloud{Points3<double>(3, static_cast<Index>(pts.size())), CloudProvenance::File};
  for (std::size_t k = 0; k < pts.size(); ++k) cloud.points.col(static_cast<Index>(k)) = pts[k];
  return cloud;
}

}  // namespace sym3d
