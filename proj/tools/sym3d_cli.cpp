// Command-line driver for the desk-scale symmetric-triplane experiments.
//
//   sym3d fit      --shape capsule-chair --azimuth-range 0:120 --out runs/a
//   sym3d analyze  --model runs/a/model.bin --out runs/a/analysis
//   sym3d render   --mesh runs/a/mesh.obj --azimuth 30 --out view.pgm
//   sym3d metrics  --gen runs/a/mesh.obj --ref target.obj
//   sym3d export   --model runs/a/model.bin --out mesh.obj

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sym3d/harness/analyze.hpp"
#include "sym3d/harness/fit.hpp"
#include "sym3d/harness/render.hpp"
#include "sym3d/serialize.hpp"

namespace fs = std::filesystem;
using namespace sym3d;
using namespace sym3d::harness;

namespace {

PointCloud load_cloud(const fs::path& path, Index samples, std::uint64_t seed) {
  if (path.extension() == ".obj") return sample_mesh_surface(read_obj(path), samples, seed);
  return read_point_cloud(path);
}

TriMesh analytic_mesh(ShapeKind kind, int resolution) {
  const TargetShape shape(kind);
  return marching_tets(populate(build_tet_grid(resolution), [&](const Vec3& p) { return shape.sdf(p); }));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric triplane fitting, analysis and evaluation"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a scene model to an analytic shape from partial views");
  std::string shape_arg, range_arg, config_path, out_dir = "fit_out";
  double alpha = 0, beta = 0;
  std::uint64_t seed = 0;
  int steps = 0;
  bool mirror = false, no_vsa = false, no_tex_sym = false;
  auto* o_shape = fit->add_option("--shape", shape_arg, "sphere | capsule-chair | winged");
  auto* o_range = fit->add_option("--azimuth-range", range_arg, "observed camera azimuths A:B in degrees");
  auto* o_mirror = fit->add_flag("--mirror-augment", mirror, "also admit mirrored views");
  auto* o_alpha = fit->add_option("--alpha", alpha, "weight of the feature symmetry term");
  auto* o_beta = fit->add_option("--beta", beta, "weight of the attention symmetry term");
  auto* o_novsa = fit->add_flag("--no-vsa", no_vsa, "disable view-wise spatial attention");
  auto* o_notex = fit->add_flag("--no-tex-sym", no_tex_sym, "disable symmetric texture aggregation");
  auto* o_seed = fit->add_option("--seed", seed, "random seed");
  auto* o_steps = fit->add_option("--steps", steps, "optimizer steps");
  fit->add_option("--out", out_dir, "output directory")->capture_default_str();
  fit->add_option("--config", config_path, "key = value file applied before the flags");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Similarity matrix, symmetry terms and plane images of a model");
  std::string model_path, analyze_out = "analysis";
  analyze_cmd->add_option("--model", model_path, "model.bin written by fit")->required();
  analyze_cmd->add_option("--out", analyze_out, "output directory")->capture_default_str();

  // render
  auto* render = app.add_subcommand("render", "Orthographic silhouette of a mesh as a P5 image");
  std::string mesh_path, render_out = "silhouette.pgm";
  double azimuth = 0, elevation = 0;
  int resolution = 256;
  render->add_option("--mesh", mesh_path, "OBJ mesh")->required();
  render->add_option("--azimuth", azimuth, "camera azimuth in degrees")->capture_default_str();
  render->add_option("--elevation", elevation, "camera elevation in degrees")->capture_default_str();
  render->add_option("--resolution", resolution, "image size in pixels")->capture_default_str();
  render->add_option("--out", render_out, "output .pgm")->capture_default_str();

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Chamfer, COV and MMD between point clouds or meshes");
  std::vector<std::string> gen_paths, ref_paths;
  Index metric_samples = 2048;
  std::uint64_t metric_seed = 0;
  metrics->add_option("--gen", gen_paths, "generated clouds (.xyz text or .obj)")->required();
  metrics->add_option("--ref", ref_paths, "reference clouds (.xyz text or .obj)")->required();
  metrics->add_option("--samples", metric_samples, "points sampled per OBJ mesh")->capture_default_str();
  metrics->add_option("--seed", metric_seed, "sampling seed")->capture_default_str();

  // export
  auto* exp = app.add_subcommand("export", "Extract a mesh from a model or an analytic target shape");
  std::string export_model, export_shape, export_out = "mesh.obj", export_points;
  int tet_resolution = 32;
  Index point_count = 4000;
  auto* o_emodel = exp->add_option("--model", export_model, "model.bin written by fit");
  auto* o_eshape = exp->add_option("--shape", export_shape, "analytic target shape instead of a model");
  o_emodel->excludes(o_eshape);
  exp->add_option("--tet-resolution", tet_resolution, "tet grid cells per axis")->capture_default_str();
  exp->add_option("--out", export_out, "output .obj")->capture_default_str();
  exp->add_option("--points", export_points, "also write surface samples as x y z text");
  exp->add_option("--point-count", point_count, "samples for --points")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) {
      FitConfig cfg;
      if (!config_path.empty()) apply_config_file(cfg, config_path);
      if (o_shape->count()) cfg.shape = parse_shape(shape_arg);
      if (o_range->count()) {
        const bool keep_mirror = cfg.visibility.mirror_augment;
        cfg.visibility = parse_azimuth_range(range_arg);
        cfg.visibility.mirror_augment = keep_mirror;
      }
      if (o_mirror->count()) cfg.visibility.mirror_augment = mirror;
      if (o_alpha->count()) cfg.alpha = alpha;
      if (o_beta->count()) cfg.beta = beta;
      if (o_novsa->count()) cfg.use_vsa = !no_vsa;
      if (o_notex->count()) cfg.use_tex_sym = !no_tex_sym;
      if (o_seed->count()) cfg.seed = seed;
      if (o_steps->count()) cfg.steps = steps;

      try {
        const FitResult result = run_fit(cfg);
        write_fit_outputs(result, out_dir);
        const auto& r = result.report;
        std::printf("chamfer_total %.6g  visible %.6g  hidden %s  (%.1f s)\n", r.chamfer_total, r.chamfer_visible,
                    r.chamfer_hidden ? std::to_string(*r.chamfer_hidden).c_str() : "NA", r.wall_seconds);
        std::printf("wrote %s\n", out_dir.c_str());
      } catch (const FitDiverged& e) {
        fs::create_directories(out_dir);
        std::ofstream os(fs::path(out_dir) / "trajectory.csv");
        write_trajectory_csv(e.report, os);
        std::fprintf(stderr, "%s (partial trajectory in %s)\n", e.what(), out_dir.c_str());
        return 2;
      }
    } else if (*analyze_cmd) {
      const auto a = analyze_to_directory(load_model(model_path), analyze_out);
      std::printf("R(G) %.6g  R(A) %.6g  similarity %ldx%ld -> %s\n", a.rg.value, a.ra.value,
                  static_cast<long>(a.similarity.rows()), static_cast<long>(a.similarity.cols()), analyze_out.c_str());
    } else if (*render) {
      const auto img = render_silhouette(read_obj(mesh_path), azimuth, elevation, resolution);
      write_pgm(img, render_out);
      std::printf("%zu foreground pixels -> %s\n", img.count_nonzero(), render_out.c_str());
    } else if (*metrics) {
      std::vector<PointCloud> gen, ref;
      for (const auto& p : gen_paths) gen.push_back(load_cloud(p, metric_samples, metric_seed));
      for (const auto& p : ref_paths) ref.push_back(load_cloud(p, metric_samples, metric_seed + 1));
      if (gen.size() == 1 && ref.size() == 1) {
        std::printf("chamfer %.10g\n", chamfer(gen[0], ref[0]));
      } else {
        std::printf("coverage %.10g\nmmd %.10g\n", coverage(gen, ref), mmd(gen, ref));
      }
    } else if (*exp) {
      TriMesh mesh;
      if (!export_model.empty()) {
        const auto model = load_model(export_model);
        mesh = marching_tets(populate(build_tet_grid(tet_resolution), model));
        colorize(mesh, model);
      } else if (!export_shape.empty()) {
        mesh = analytic_mesh(parse_shape(export_shape), tet_resolution);
      } else {
        throw InvalidInput("export needs --model or --shape");
      }
      export_obj(mesh, export_out);
      if (!export_points.empty()) {
        const PointCloud cloud = export_shape.empty()
                                     ? sample_mesh_surface(mesh, point_count, 0)
                                     : TargetShape(parse_shape(export_shape)).sample_surface(point_count, 0);
        write_point_cloud(cloud, export_points);
      }
      std::printf("%zu vertices, %zu triangles -> %s\n", mesh.vertices.size(), mesh.triangles.size(),
                  export_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
