#include "sym3d/harness/fit.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "sym3d/serialize.hpp"

namespace sym3d::harness {

void FitConfig::validate() const {
  visibility.validate();
  if (alpha < 0 || beta < 0) throw InvalidInput("alpha and beta must be nonnegative");
  if (steps < 0) throw InvalidInput("steps must be nonnegative");
  if (samples_per_step < 1 || color_samples_per_step < 0) throw InvalidInput("sample counts must be positive");
  if (!(learning_rate > 0)) throw InvalidInput("learning rate must be positive");
  if (plane_resolution < 2 || channels < 1 || hidden < 1) throw InvalidInput("bad model dimensions");
  if (tet_resolution < 1 || eval_samples < 1) throw InvalidInput("bad evaluation settings");
  if (log_every < 1) throw InvalidInput("log_every must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw InvalidInput("config: '" + key + "' expects a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::logic_error&) {
  }
  throw InvalidInput("config: '" + key + "' expects a number, got '" + v + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used == v.size()) return d;
  } catch (const std::logic_error&) {
  }
  throw InvalidInput("config: '" + key + "' expects an integer, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string("NA"); }

Points3<double> select_columns(const Points3<double>& pts, const std::vector<Index>& cols) {
  Points3<double> out(3, static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = pts.col(cols[k]);
  return out;
}

}  // namespace

void apply_config_value(FitConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "shape") {
    cfg.shape = parse_shape(value);
  } else if (key == "azimuth_range") {
    const bool mirror = cfg.visibility.mirror_augment;
    cfg.visibility = parse_azimuth_range(value);
    cfg.visibility.mirror_augment = mirror;
  } else if (key == "mirror_augment") {
    cfg.visibility.mirror_augment = parse_bool(key, value);
  } else if (key == "alpha") {
    cfg.alpha = parse_double(key, value);
  } else if (key == "beta") {
    cfg.beta = parse_double(key, value);
  } else if (key == "use_vsa") {
    cfg.use_vsa = parse_bool(key, value);
  } else if (key == "use_tex_sym") {
    cfg.use_tex_sym = parse_bool(key, value);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "steps") {
    cfg.steps = static_cast<int>(parse_int(key, value));
  } else if (key == "samples_per_step") {
    cfg.samples_per_step = static_cast<int>(parse_int(key, value));
  } else if (key == "color_samples_per_step") {
    cfg.color_samples_per_step = static_cast<int>(parse_int(key, value));
  } else if (key == "learning_rate") {
    cfg.learning_rate = parse_double(key, value);
  } else if (key == "color_weight") {
    cfg.color_weight = parse_double(key, value);
  } else if (key == "normalize_symmetry") {
    cfg.normalize_symmetry = parse_bool(key, value);
  } else if (key == "plane_resolution") {
    cfg.plane_resolution = static_cast<int>(parse_int(key, value));
  } else if (key == "channels") {
    cfg.channels = static_cast<int>(parse_int(key, value));
  } else if (key == "hidden") {
    cfg.hidden = static_cast<int>(parse_int(key, value));
  } else if (key == "plane_init") {
    cfg.plane_init = parse_double(key, value);
  } else if (key == "tet_resolution") {
    cfg.tet_resolution = static_cast<int>(parse_int(key, value));
  } else if (key == "eval_samples") {
    cfg.eval_samples = static_cast<int>(parse_int(key, value));
  } else if (key == "log_every") {
    cfg.log_every = static_cast<int>(parse_int(key, value));
  } else {
    throw InvalidInput("config: unknown key '" + key + "'");
  }
}

void apply_config_text(FitConfig& cfg, std::istream& is) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_config_file(FitConfig& cfg, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file " + path.string());
  apply_config_text(cfg, is);
}

RegionalChamfer regional_chamfer(const PointCloud& gen, const PointCloud& ref, const VisibilitySpec& vis) {
  if (gen.empty() || ref.empty()) throw InvalidInput("regional_chamfer: empty cloud");
  const VectorX<double> ref_to_gen = nearest_squared_distances(ref.points, gen.points);
  const VectorX<double> gen_to_ref = nearest_squared_distances(gen.points, ref.points);

  struct Acc {
    double sum = 0;
    Index count = 0;
    double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
  };
  Acc ref_vis, ref_hid, gen_vis, gen_hid;
  for (Index k = 0; k < ref.size(); ++k) {
    auto& acc = visible(ref.points.col(k), vis) ? ref_vis : ref_hid;
    acc.sum += ref_to_gen[k];
    ++acc.count;
  }
  for (Index k = 0; k < gen.size(); ++k) {
    auto& acc = visible(gen.points.col(k), vis) ? gen_vis : gen_hid;
    acc.sum += gen_to_ref[k];
    ++acc.count;
  }

  RegionalChamfer r;
  r.total = ref_to_gen.mean() + gen_to_ref.mean();
  r.visible = ref_vis.mean() + gen_vis.mean();
  if (ref_hid.count > 0) r.hidden = ref_hid.mean() + gen_hid.mean();
  r.ref_visible = ref_vis.count;
  r.ref_hidden = ref_hid.count;
  return r;
}

FitResult run_fit(const FitConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const TargetShape shape(cfg.shape);
  const Index n = cfg.plane_resolution, c = cfg.channels;

  std::mt19937_64 init_rng(cfg.seed);
  auto model = SceneModel<double>::random(n, c, cfg.hidden, cfg.plane_init, init_rng);
  model.use_vsa = cfg.use_vsa;
  model.use_tex_sym = cfg.use_tex_sym;

  const double alpha = cfg.normalize_symmetry ? cfg.alpha / static_cast<double>(n * n * c) : cfg.alpha;
  const double beta = cfg.normalize_symmetry ? cfg.beta / static_cast<double>(n * n) : cfg.beta;

  // Colors are supervised on observed surface points only.
  Points3<double> color_pool;
  {
    const PointCloud pool = shape.sample_surface(16384, cfg.seed ^ 0xC0104ULL);
    std::vector<Index> keep;
    for (Index k = 0; k < pool.size(); ++k)
      if (visible(pool.points.col(k), cfg.visibility)) keep.push_back(k);
    color_pool = select_columns(pool.points, keep);
  }

  std::mt19937_64 sample_rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 1);
  auto blocks = model.parameter_blocks();
  std::vector<AdamState<double>> states(blocks.size());
  const AdamConfig adam{.lr = cfg.learning_rate};

  FitReport report;
  report.config = cfg;

  FitBatch<double> batch;
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<Vec3> kept;
    kept.reserve(static_cast<std::size_t>(cfg.samples_per_step));
    for (int k = 0; k < cfg.samples_per_step; ++k) {
      Vec3 p;
      for (int d = 0; d < 3; ++d) p[d] = 2.0 * unit_uniform(sample_rng) - 1.0;
      if (visible(p, cfg.visibility)) kept.push_back(p);
    }
    if (kept.empty()) throw InvalidInput("run_fit: no visible supervision points");
    batch.sdf_points.resize(3, static_cast<Index>(kept.size()));
    batch.sdf_targets.resize(static_cast<Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
      batch.sdf_points.col(static_cast<Index>(k)) = kept[k];
      batch.sdf_targets[static_cast<Index>(k)] = shape.sdf(kept[k]);
    }

    const Index nc = color_pool.cols() > 0 ? cfg.color_samples_per_step : 0;
    batch.color_points.resize(3, nc);
    batch.color_targets.resize(3, nc);
    for (Index k = 0; k < nc; ++k) {
      const auto pick = static_cast<Index>(unit_uniform(sample_rng) * static_cast<double>(color_pool.cols()));
      batch.color_points.col(k) = color_pool.col(std::min(pick, color_pool.cols() - 1));
      batch.color_targets.col(k) = TargetShape::color(batch.color_points.col(k));
    }

    auto ev = evaluate_fit(model, batch, alpha, beta, cfg.color_weight);
    const bool last = step + 1 == cfg.steps;
    if (step % cfg.log_every == 0 || last || !std::isfinite(ev.total)) {
      report.trajectory.push_back({step, ev.total, ev.sdf.regression, ev.sdf.rg.value, ev.sdf.ra.value, ev.color,
                                   static_cast<int>(kept.size())});
    }
    if (!std::isfinite(ev.total)) {
      report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      throw FitDiverged("run_fit: loss became non-finite at step " + std::to_string(step), report);
    }
    auto grads = ev.grads.parameter_blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) adam_step<double>(blocks[b], grads[b], states[b], adam);
  }

  TriMesh mesh = marching_tets(populate(build_tet_grid(cfg.tet_resolution), model));
  colorize(mesh, model);
  report.mesh_vertices = mesh.vertices.size();
  report.mesh_triangles = mesh.triangles.size();

  const PointCloud ref = shape.sample_surface(cfg.eval_samples, cfg.seed ^ 0x5EEDULL);
  if (mesh.empty()) {
    const double inf = std::numeric_limits<double>::infinity();
    report.chamfer_total = report.chamfer_visible = inf;
    for (Index k = 0; k < ref.size(); ++k) (visible(ref.points.col(k), cfg.visibility) ? report.ref_visible : report.ref_hidden)++;
    if (report.ref_hidden > 0) report.chamfer_hidden = inf;
  } else {
    const PointCloud gen = sample_mesh_surface(mesh, cfg.eval_samples, cfg.seed ^ 0x6E4ULL);
    const auto rc = regional_chamfer(gen, ref, cfg.visibility);
    report.chamfer_total = rc.total;
    report.chamfer_visible = rc.visible;
    report.chamfer_hidden = rc.hidden;
    report.ref_visible = rc.ref_visible;
    report.ref_hidden = rc.ref_hidden;
  }

  const Points3<double> rgb = evaluate_color(model, ref.points);
  double se_vis = 0, se_hid = 0;
  for (Index k = 0; k < ref.size(); ++k) {
    const double se = (rgb.col(k) - TargetShape::color(ref.points.col(k))).squaredNorm() / 3.0;
    (visible(ref.points.col(k), cfg.visibility) ? se_vis : se_hid) += se;
  }
  if (report.ref_visible > 0) report.color_rmse_visible = std::sqrt(se_vis / static_cast<double>(report.ref_visible));
  if (report.ref_hidden > 0) report.color_rmse_hidden = std::sqrt(se_hid / static_cast<double>(report.ref_hidden));

  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {std::move(report), std::move(model), std::move(mesh)};
}

void write_summary_csv(const FitReport& r, std::ostream& os) {
  const FitConfig& c = r.config;
  const LossRecord last = r.trajectory.empty() ? LossRecord{} : r.trajectory.back();
  os << kSummaryHeader << '\n';
  os << shape_name(c.shape) << ',' << fmt(c.visibility.begin_deg) << ',' << fmt(c.visibility.end_deg) << ','
     << int(c.visibility.mirror_augment) << ',' << fmt(c.alpha) << ',' << fmt(c.beta) << ',' << int(c.use_vsa)
     << ',' << int(c.use_tex_sym) << ',' << c.seed << ',' << c.steps << ',' << c.samples_per_step << ','
     << fmt(c.learning_rate) << ',' << c.plane_resolution << ',' << c.channels << ',' << c.hidden << ','
     << c.tet_resolution << ',' << fmt(r.chamfer_total) << ',' << fmt(r.chamfer_visible) << ','
     << fmt(r.chamfer_hidden) << ',' << r.ref_visible << ',' << r.ref_hidden << ','
     << fmt(r.color_rmse_visible) << ',' << fmt(r.color_rmse_hidden) << ',' << fmt(last.total) << ','
     << fmt(last.rg) << ',' << fmt(last.ra) << ',' << r.mesh_vertices << ',' << r.mesh_triangles << '\n';
}

void write_trajectory_csv(const FitReport& r, std::ostream& os) {
  os << kTrajectoryHeader << '\n';
  for (const auto& rec : r.trajectory) {
    os << rec.step << ',' << fmt(rec.total) << ',' << fmt(rec.regression) << ',' << fmt(rec.rg) << ','
       << fmt(rec.ra) << ',' << fmt(rec.color) << ',' << rec.supervised_points << '\n';
  }
}

void write_fit_outputs(const FitResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto write_text = [&](const char* name, auto&& writer) {
    std::ofstream os(dir / name);
    if (!os) throw IoError("cannot write " + (dir / name).string());
    writer(os);
  };
  write_text("summary.csv", [&](std::ostream& os) { write_summary_csv(result.report, os); });
  write_text("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(result.report, os); });
  save_model(result.model, dir / "model.bin");
  export_obj(result.mesh, dir / "mesh.obj");
}

}  // namespace sym3d::harness
