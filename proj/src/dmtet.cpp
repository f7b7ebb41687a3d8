#include "sym3d/dmtet.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

namespace sym3d {

namespace {

// Kuhn split: every tet walks from corner (0,0,0) to (1,1,1) along the axes
// in one of the 6 orders. Cubes above z=0 use the z-mirrored walk, from
// (0,0,1) to (1,1,0), so the whole grid is symmetric under z -> -z when R is
// even. Within each half the split is translation invariant, and the only
// diagonal on the z=0 faces runs along (1,1,0) in both halves, so faces
// conform everywhere.
constexpr std::array<std::array<int, 3>, 6> kAxisOrders = {{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
}};

double signed_volume6(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a);
}

double nudged(double s) { return s == 0.0 ? 1e-12 : s; }

}  // namespace

TetGrid build_tet_grid(int resolution) {
  if (resolution < 1) throw InvalidInput("build_tet_grid: resolution must be >= 1");
  TetGrid g;
  g.resolution = resolution;
  const int n = resolution + 1;
  g.vertices.reserve(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        g.vertices.emplace_back(-1.0 + 2.0 * i / resolution, -1.0 + 2.0 * j / resolution,
                                -1.0 + 2.0 * k / resolution);

  g.tets.reserve(static_cast<std::size_t>(6) * resolution * resolution * resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      for (int k = 0; k < resolution; ++k) {
        const bool mirrored = 2 * k + 1 > resolution;
        for (const auto& order : kAxisOrders) {
          std::array<int, 3> c = {i, j, mirrored ? k + 1 : k};
          std::array<int, 4> tet{};
          tet[0] = g.vertex_index(c[0], c[1], c[2]);
          for (int step = 0; step < 3; ++step) {
            c[order[step]] += (order[step] == 2 && mirrored) ? -1 : 1;
            tet[step + 1] = g.vertex_index(c[0], c[1], c[2]);
          }
          const auto& v = g.vertices;
          if (signed_volume6(v[tet[0]], v[tet[1]], v[tet[2]], v[tet[3]]) < 0) std::swap(tet[2], tet[3]);
          g.tets.push_back(tet);
        }
      }
    }
  }
  return g;
}

double tet_orientation(const TetGrid& grid, std::size_t tet) {
  const auto& t = grid.tets[tet];
  return signed_volume6(grid.deformed_vertex(t[0]), grid.deformed_vertex(t[1]),
                        grid.deformed_vertex(t[2]), grid.deformed_vertex(t[3]));
}

TetGrid populate(TetGrid grid, const SceneModel<double>& model) {
  Points3<double> pts(3, static_cast<Index>(grid.vertices.size()));
  for (std::size_t v = 0; v < grid.vertices.size(); ++v) pts.col(static_cast<Index>(v)) = grid.vertices[v];
  const MatrixX<double> out = evaluate_geometry(model, pts);
  grid.sdf.resize(grid.vertices.size());
  grid.deform.resize(grid.vertices.size());
  for (std::size_t v = 0; v < grid.vertices.size(); ++v) {
    grid.sdf[v] = out(0, static_cast<Index>(v));
    grid.deform[v] = out.col(static_cast<Index>(v)).tail<3>();
  }
  return grid;
}

TetGrid populate(TetGrid grid, const std::function<double(const Vec3&)>& sdf) {
  grid.sdf.resize(grid.vertices.size());
  grid.deform.assign(grid.vertices.size(), Vec3::Zero());
  for (std::size_t v = 0; v < grid.vertices.size(); ++v) grid.sdf[v] = sdf(grid.vertices[v]);
  return grid;
}

TriMesh marching_tets(const TetGrid& grid) {
  if (!grid.populated()) throw InvalidInput("marching_tets: grid has no sdf values");
  TriMesh mesh;
  std::unordered_map<std::uint64_t, int> edge_vertex;

  const auto edge_point = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    const auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const double sa = nudged(grid.sdf[a]);
    const double sb = nudged(grid.sdf[b]);
    const double t = sa / (sa - sb);
    const Vec3 pa = grid.deformed_vertex(a);
    const Vec3 pb = grid.deformed_vertex(b);
    const int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(pa + t * (pb - pa));
    edge_vertex.emplace(key, id);
    return id;
  };

  const auto emit = [&](std::array<int, 3> tri, const Vec3& outward) {
    const Vec3& p0 = mesh.vertices[tri[0]];
    const Vec3 n = (mesh.vertices[tri[1]] - p0).cross(mesh.vertices[tri[2]] - p0);
    if (n.squaredNorm() == 0.0) return;
    if (n.dot(outward) < 0) std::swap(tri[1], tri[2]);
    mesh.triangles.push_back(tri);
  };

  for (const auto& tet : grid.tets) {
    std::array<int, 4> in{}, out{};
    int n_in = 0, n_out = 0;
    for (int v : tet) {
      if (nudged(grid.sdf[v]) < 0) {
        in[n_in++] = v;
      } else {
        out[n_out++] = v;
      }
    }
    if (n_in == 0 || n_out == 0) continue;

    Vec3 in_centroid = Vec3::Zero(), out_centroid = Vec3::Zero();
    for (int q = 0; q < n_in; ++q) in_centroid += grid.deformed_vertex(in[q]);
    for (int q = 0; q < n_out; ++q) out_centroid += grid.deformed_vertex(out[q]);
    const Vec3 outward = out_centroid / n_out - in_centroid / n_in;

    if (n_in == 1) {
      emit({edge_point(in[0], out[0]), edge_point(in[0], out[1]), edge_point(in[0], out[2])}, outward);
    } else if (n_in == 3) {
      emit({edge_point(out[0], in[0]), edge_point(out[0], in[1]), edge_point(out[0], in[2])}, outward);
    } else {
      const int q0 = edge_point(in[0], out[0]);
      const int q1 = edge_point(in[0], out[1]);
      const int q2 = edge_point(in[1], out[1]);
      const int q3 = edge_point(in[1], out[0]);
      emit({q0, q1, q2}, outward);
      emit({q0, q2, q3}, outward);
    }
  }
  return mesh;
}

void colorize(TriMesh& mesh, const SceneModel<double>& model) {
  mesh.colors.clear();
  if (mesh.vertices.empty()) return;
  Points3<double> pts(3, static_cast<Index>(mesh.vertices.size()));
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) pts.col(static_cast<Index>(v)) = mesh.vertices[v];
  const Points3<double> rgb = evaluate_color(model, pts);
  mesh.colors.reserve(mesh.vertices.size());
  for (Index v = 0; v < rgb.cols(); ++v) mesh.colors.emplace_back(rgb.col(v));
}

void export_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("export_obj: cannot open " + path.string());
  const bool with_color = !mesh.colors.empty();
  if (with_color && mesh.colors.size() != mesh.vertices.size()) {
    throw InvalidInput("export_obj: color count != vertex count");
  }
  os << "# vertices " << mesh.vertices.size() << " faces " << mesh.triangles.size() << '\n';
  os << std::setprecision(17);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Vec3& p = mesh.vertices[v];
    os << "v " << p.x() << ' ' << p.y() << ' ' << p.z();
    if (with_color) os << ' ' << mesh.colors[v].x() << ' ' << mesh.colors[v].y() << ' ' << mesh.colors[v].z();
    os << '\n';
  }
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!os) throw IoError("export_obj: write failed for " + path.string());
}

TriMesh read_obj(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_obj: cannot open " + path.string());
  TriMesh mesh;
  std::string line;
  bool any_color = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) throw FormatError("read_obj: bad vertex line: " + line);
      mesh.vertices.push_back(p);
      Vec3 c;
      if (ls >> c.x() >> c.y() >> c.z()) {
        mesh.colors.resize(mesh.vertices.size() - 1, Vec3::Zero());
        mesh.colors.push_back(c);
        any_color = true;
      }
    } else if (tag == "f") {
      std::array<int, 3> t{};
      for (int& idx : t) {
        std::string tok;
        if (!(ls >> tok)) throw FormatError("read_obj: face needs 3 indices: " + line);
        idx = std::stoi(tok.substr(0, tok.find('/'))) - 1;
      }
      mesh.triangles.push_back(t);
    }
  }
  if (any_color) mesh.colors.resize(mesh.vertices.size(), Vec3::Zero());
  for (const auto& t : mesh.triangles)
    for (int idx : t)
      if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size())) {
        throw FormatError("read_obj: face index out of range");
      }
  return mesh;
}

MeshTopology mesh_topology(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> uses;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      ++uses[{std::min(a, b), std::max(a, b)}];
    }
  }
  MeshTopology topo;
  std::vector<bool> referenced(mesh.vertices.size(), false);
  for (const auto& t : mesh.triangles)
    for (int idx : t) referenced[idx] = true;
  topo.vertices = static_cast<std::size_t>(std::count(referenced.begin(), referenced.end(), true));
  topo.edges = uses.size();
  topo.faces = mesh.triangles.size();
  for (const auto& [edge, count] : uses) {
    if (count == 1) ++topo.boundary_edges;
    if (count > 2) ++topo.nonmanifold_edges;
  }
  return topo;
}

double triangle_area(const TriMesh& mesh, std::size_t tri) {
  const auto& t = mesh.triangles[tri];
  const Vec3& p0 = mesh.vertices[t[0]];
  return 0.5 * (mesh.vertices[t[1]] - p0).cross(mesh.vertices[t[2]] - p0).norm();
}

}  // namespace sym3d
