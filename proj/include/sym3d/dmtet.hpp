#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <vector>

#include "sym3d/model.hpp"

namespace sym3d {

/// Regular (R+1)^3 lattice over [-1,1]^3 split into 6 tets per cube; the
/// split is mirrored across z=0, so for even R the grid is z-symmetric.
///
/// Per-vertex sdf and deform are empty until populated. Deformed vertex
/// positions are lattice + deform_scale() * deform with deform in (-1,1)^3.
struct TetGrid {
  int resolution = 0;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  std::vector<double> sdf;
  std::vector<Vec3> deform;

  bool populated() const { return !vertices.empty() && sdf.size() == vertices.size(); }

  /// Per-axis displacement cap: 0.15 of a cell. The oriented volume of a tet
  /// is multi-affine in its vertex displacements, and every corner of the
  /// displacement box keeps the 6-tet split positively oriented at this cap.
  double deform_scale() const { return 0.15 * (2.0 / resolution); }

  Vec3 deformed_vertex(std::size_t v) const {
    if (deform.size() != vertices.size()) return vertices[v];
    return vertices[v] + deform_scale() * deform[v];
  }

  int vertex_index(int i, int j, int k) const {
    const int n = resolution + 1;
    return (i * n + j) * n + k;
  }
};

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> colors;  // empty or one per vertex

  bool empty() const { return triangles.empty(); }
};

TetGrid build_tet_grid(int resolution);

/// Signed volume * 6 of a tet under the current (deformed) positions.
double tet_orientation(const TetGrid& grid, std::size_t tet);

/// Fills sdf/deform by querying the model at every lattice vertex.
TetGrid populate(TetGrid grid, const SceneModel<double>& model);

/// Fills sdf from an analytic field; deform stays zero.
TetGrid populate(TetGrid grid, const std::function<double(const Vec3&)>& sdf);

/// Marching tetrahedra over the deformed grid. Surface vertices are linear
/// interpolants along sign-changing edges, shared between tets by edge;
/// triangle normals point toward positive sdf. Vertices with sdf exactly 0
/// are treated as +1e-12.
TriMesh marching_tets(const TetGrid& grid);

/// Fills mesh.colors from the model's texture branch.
void colorize(TriMesh& mesh, const SceneModel<double>& model);

void export_obj(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh read_obj(const std::filesystem::path& path);

/// Mesh diagnostics used by tests and the harness.
struct MeshTopology {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t faces = 0;
  std::size_t boundary_edges = 0;     // used by one triangle
  std::size_t nonmanifold_edges = 0;  // used by more than two

  long euler_characteristic() const {
    return static_cast<long>(vertices) - static_cast<long>(edges) + static_cast<long>(faces);
  }
  bool watertight() const { return boundary_edges == 0 && nonmanifold_edges == 0; }
};

MeshTopology mesh_topology(const TriMesh& mesh);

double triangle_area(const TriMesh& mesh, std::size_t tri);

}  // namespace sym3d
