#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sym3d/dmtet.hpp"
#include "sym3d/harness/shapes.hpp"
#include "sym3d/harness/visibility.hpp"

namespace sym3d::harness {

/// Everything that determines a fitting run. Two runs with equal configs
/// produce byte-identical reports.
struct FitConfig {
  ShapeKind shape = ShapeKind::CapsuleChair;
  VisibilitySpec visibility;
  double alpha = 100.0;
  double beta = 10.0;
  bool use_vsa = true;
  bool use_tex_sym = true;
  std::uint64_t seed = 0;

  int steps = 3000;
  int samples_per_step = 4096;
  int color_samples_per_step = 1024;
  double learning_rate = 3e-3;
  double color_weight = 1.0;
  // Divides R(G) by N*N*C and R(A) by N*N before weighting.
  bool normalize_symmetry = false;

  int plane_resolution = 32;
  int channels = 16;
  int hidden = 64;
  double plane_init = 0.1;
  int tet_resolution = 32;
  int eval_samples = 4000;
  int log_every = 10;

  void validate() const;
};

/// Applies `key = value` lines (blank lines and '#' comments ignored).
void apply_config_text(FitConfig& cfg, std::istream& is);
void apply_config_file(FitConfig& cfg, const std::filesystem::path& path);
void apply_config_value(FitConfig& cfg, const std::string& key, const std::string& value);

struct LossRecord {
  int step = 0;
  double total = 0;
  double regression = 0;
  double rg = 0;
  double ra = 0;
  double color = 0;
  int supervised_points = 0;
};

struct FitReport {
  FitConfig config;
  std::vector<LossRecord> trajectory;
  double chamfer_total = 0;
  double chamfer_visible = 0;
  std::optional<double> chamfer_hidden;  // empty when nothing is hidden
  Index ref_visible = 0;
  Index ref_hidden = 0;
  double color_rmse_visible = 0;
  std::optional<double> color_rmse_hidden;
  std::size_t mesh_vertices = 0;
  std::size_t mesh_triangles = 0;
  double wall_seconds = 0;  // not part of the CSV output
};

struct FitResult {
  FitReport report;
  SceneModel<double> model;
  TriMesh mesh;
};

/// Raised when the loss goes non-finite; carries the trajectory so far.
struct FitDiverged : Error {
  FitDiverged(const std::string& what, FitReport partial) : Error(what), report(std::move(partial)) {}
  FitReport report;
};

FitResult run_fit(const FitConfig& cfg);

/// Regional chamfer between a generated and a reference cloud: every
/// reference point and every generated point is assigned to the visible or
/// hidden region by `visible()`; a region's value is
///   mean over its reference points of the squared distance to the nearest
///   generated point + mean over its generated points of the squared distance
///   to the nearest reference point
/// (a term with no points contributes 0).
struct RegionalChamfer {
  double total = 0;
  double visible = 0;
  std::optional<double> hidden;
  Index ref_visible = 0;
  Index ref_hidden = 0;
};

RegionalChamfer regional_chamfer(const PointCloud& gen, const PointCloud& ref, const VisibilitySpec& vis);

/// summary.csv: header row + one data row.
void write_summary_csv(const FitReport& r, std::ostream& os);
/// trajectory.csv: header row + one row per logged step.
void write_trajectory_csv(const FitReport& r, std::ostream& os);

/// Writes summary.csv, trajectory.csv, model.bin and mesh.obj into `dir`.
void write_fit_outputs(const FitResult& result, const std::filesystem::path& dir);

inline constexpr const char* kSummaryHeader =
    "shape,azimuth_begin,azimuth_end,mirror_augment,alpha,beta,use_vsa,use_tex_sym,seed,steps,"
    "samples_per_step,learning_rate,plane_resolution,channels,hidden,tet_resolution,"
    "chamfer_total,chamfer_visible,chamfer_hidden,ref_visible,ref_hidden,color_rmse_visible,"
    "color_rmse_hidden,final_loss,final_rg,final_ra,mesh_vertices,mesh_triangles";

inline constexpr const char* kTrajectoryHeader = "step,loss,regression,rg,ra,color,supervised_points";

}  // namespace sym3d::harness
