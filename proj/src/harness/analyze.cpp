#include "sym3d/harness/analyze.hpp"

#include <cstdio>
#include <fstream>

#include "sym3d/harness/render.hpp"

namespace sym3d::harness {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix channel_slice(const FeaturePlane<double>& p, Index ch) {
  RowMatrix m(p.resolution(), p.resolution());
  for (Index i = 0; i < p.resolution(); ++i)
    for (Index j = 0; j < p.resolution(); ++j) m(i, j) = p(i, j, ch);
  return m;
}

}  // namespace

Analysis analyze(const SceneModel<double>& model) {
  const auto fwd = geometry_forward(model);
  Analysis a;
  a.similarity = similarity_matrix(fwd.planes->xy, fwd.planes->xz, fwd.planes->yz);
  a.rg = feature_symmetry_loss(model.geometry);
  if (fwd.attention) a.ra = attention_symmetry_loss(fwd.attention->yz, fwd.attention->xz);
  return a;
}

void write_similarity_csv(const MatrixX<double>& sim, std::ostream& os) {
  os << "row";
  for (Index c = 0; c < sim.cols(); ++c) os << ",ch" << c;
  os << '\n';
  for (Index r = 0; r < sim.rows(); ++r) {
    os << "ch" << r;
    for (Index c = 0; c < sim.cols(); ++c) os << ',' << fmt(sim(r, c));
    os << '\n';
  }
}

void write_symmetry_csv(const Analysis& a, std::ostream& os) {
  os << "term,value\n";
  os << "rg," << fmt(a.rg.value) << '\n';
  os << "rg_yz," << fmt(a.rg.yz) << '\n';
  os << "rg_xz," << fmt(a.rg.xz) << '\n';
  os << "ra," << fmt(a.ra.value) << '\n';
  os << "ra_yz," << fmt(a.ra.yz) << '\n';
  os << "ra_xz," << fmt(a.ra.xz) << '\n';
}

Analysis analyze_to_directory(const SceneModel<double>& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const Analysis a = analyze(model);
  {
    std::ofstream os(dir / "similarity.csv");
    if (!os) throw IoError("cannot write " + (dir / "similarity.csv").string());
    write_similarity_csv(a.similarity, os);
  }
  {
    std::ofstream os(dir / "symmetry.csv");
    if (!os) throw IoError("cannot write " + (dir / "symmetry.csv").string());
    write_symmetry_csv(a, os);
  }

  const auto fwd = geometry_forward(model);
  const char* names[3] = {"xy", "xz", "yz"};
  const auto planes = fwd.planes->planes();
  for (int p = 0; p < 3; ++p) {
    for (Index ch = 0; ch < planes[p]->channels(); ++ch) {
      write_pgm(grayscale(channel_slice(*planes[p], ch)),
                dir / ("plane_" + std::string(names[p]) + "_c" + std::to_string(ch) + ".pgm"));
    }
  }
  if (fwd.attention) {
    const AttentionMap<double>* maps[3] = {&fwd.attention->xy, &fwd.attention->xz, &fwd.attention->yz};
    for (int p = 0; p < 3; ++p) {
      write_pgm(grayscale(channel_slice(maps[p]->values, 0)), dir / ("attention_" + std::string(names[p]) + ".pgm"));
    }
  }
  return a;
}

}  // namespace sym3d::harness
