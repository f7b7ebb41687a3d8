// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// hard criterion fails. All tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sym3d/harness/fit.hpp"
#include "test_support.hpp"

using namespace sym3d;
using namespace sym3d::harness;
using sym3d::testing::central_difference;
using sym3d::testing::random_plane;
using sym3d::testing::random_point;
using sym3d::testing::random_triplane;
using sym3d::testing::relative_error;

namespace {

constexpr double kLinearTol = 1e-6;
constexpr double kNonlinearTol = 1e-4;
constexpr int kGradientConfigs = 20;
constexpr double kWorkedExampleTol = 1e-12;
constexpr double kMetricTol = 1e-12;
constexpr double kMirrorTol = 1e-9;
constexpr double kPlaneTol = 1e-12;
constexpr std::int64_t kTableMacs = 19'270'000;
constexpr std::int64_t kMacSlack = 500'000;
constexpr double kVisibleSlack = 2.0;
constexpr int kSeeds = 3;

int hard_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail, bool soft = false) {
  std::printf("%s  %s  (%s)%s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str(),
              !ok && soft ? " [soft check: warning only]" : "");
  std::fflush(stdout);
  if (!ok && !soft) ++hard_failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// Fit settings shared by every experiment below. Symmetry weights are
// divided by the number of terms they sum over (see README).
FitConfig experiment_config(ShapeKind shape, const char* range, double alpha, double beta, std::uint64_t seed) {
  FitConfig cfg;
  cfg.shape = shape;
  cfg.visibility = parse_azimuth_range(range);
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.seed = seed;
  cfg.steps = 2000;
  cfg.samples_per_step = 2048;
  cfg.learning_rate = 1e-2;
  cfg.normalize_symmetry = true;
  return cfg;
}

FitReport fit_logged(const FitConfig& cfg, const std::string& label) {
  const auto r = run_fit(cfg).report;
  std::printf("      %-34s total %.6g  visible %.6g  hidden %s  (%.1f s)\n", label.c_str(), r.chamfer_total,
              r.chamfer_visible, r.chamfer_hidden ? fmt("%.6g", *r.chamfer_hidden).c_str() : "NA", r.wall_seconds);
  std::fflush(stdout);
  return r;
}

std::string summary_bytes(const FitReport& r) {
  std::ostringstream os;
  write_summary_csv(r, os);
  write_trajectory_csv(r, os);
  return os.str();
}

// ---------------------------------------------------------------------------

void check_vsa_size() {
  const VsaModule<double> m;
  Index weights = 0;
  for (const auto* k : m.kernels()) weights += k->weights.size();
  const auto ops = vsa_op_count(256, 32);
  const bool ok = VsaModule<double>::parameter_count() == 294 && weights == 294 &&
                  std::abs(ops.conv_macs - kTableMacs) <= kMacSlack;
  report("VSA parameter and MAC count", ok,
         std::to_string(weights) + " params, " + std::to_string(ops.conv_macs) + " MACs at N=256");
}

struct GradientFamily {
  std::string name;
  double tol;
  std::function<double(std::mt19937_64&)> worst_error;  // one random configuration
};

double worst_over_blocks(const std::function<double()>& f, std::vector<std::pair<double*, Index>> params,
                         const std::vector<VectorX<double>>& analytic) {
  double worst = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    const VectorX<double> num = central_difference(f, params[b].first, params[b].second);
    worst = std::max(worst, relative_error(analytic[b], num));
  }
  return worst;
}

double weighted_sum(const GeometryTriplane<double>& t, const GeometryTriplane<double>& w) {
  return t.xy.data().dot(w.xy.data()) + t.xz.data().dot(w.xz.data()) + t.yz.data().dot(w.yz.data());
}

void check_gradients() {
  std::vector<GradientFamily> families;

  families.push_back({"bilinear sampling", kLinearTol, [](std::mt19937_64& rng) {
                        auto p = random_plane(7, 3, Axis::X, Axis::Y, rng);
                        const Vec3 q = random_point(rng, -0.97, 0.97);
                        double u = q.x(), v = q.y();
                        const VectorX<double> up = random_plane(2, 1, Axis::X, Axis::Y, rng).data().head(3);
                        const auto f = [&] { return bilinear_sample(p, u, v).dot(up); };
                        const auto g = bilinear_sample_backward(p, u, v, up);
                        FeaturePlane<double> dense = p.zeros_like();
                        for (const auto& n : g.nodes) dense.node(n.i, n.j) += n.grad;
                        VectorX<double> duv(2);
                        duv << g.du, g.dv;
                        const double e1 = worst_over_blocks(f, {{p.data().data(), p.size()}}, {dense.data()});
                        VectorX<double> num(2);
                        num << central_difference(f, &u, 1)[0], central_difference(f, &v, 1)[0];
                        return std::max(e1, relative_error(duv, num));
                      }});

  families.push_back({"geometry triplane query", kLinearTol, [](std::mt19937_64& rng) {
                        auto g = random_triplane<GeometryTag>(6, 3, rng);
                        Vec3 p = random_point(rng, -0.97, 0.97);
                        const VectorX<double> up = random_plane(2, 1, Axis::X, Axis::Y, rng).data().head(3);
                        const auto f = [&] { return query_geometry(g, p).dot(up); };
                        auto grad = g.zeros_like();
                        const Vec3 dp = query_backward(g, p, up, &grad);
                        const double e = worst_over_blocks(
                            f, {{g.xy.data().data(), g.xy.size()}, {g.xz.data().data(), g.xz.size()},
                                {g.yz.data().data(), g.yz.size()}},
                            {grad.xy.data(), grad.xz.data(), grad.yz.data()});
                        return std::max(e, relative_error(dp, central_difference(f, p.data(), 3)));
                      }});

  families.push_back({"symmetric texture query", kLinearTol, [](std::mt19937_64& rng) {
                        auto t = random_triplane<TextureTag>(6, 3, rng);
                        Vec3 p = random_point(rng, -0.97, 0.97);
                        const VectorX<double> up = random_plane(2, 1, Axis::X, Axis::Y, rng).data().head(3);
                        const auto f = [&] { return query_texture_symmetric(t, p).dot(up); };
                        auto grad = t.zeros_like();
                        const Vec3 dp = query_texture_symmetric_backward(t, p, up, &grad);
                        const double e = worst_over_blocks(
                            f, {{t.xy.data().data(), t.xy.size()}, {t.xz.data().data(), t.xz.size()},
                                {t.yz.data().data(), t.yz.size()}},
                            {grad.xy.data(), grad.xz.data(), grad.yz.data()});
                        return std::max(e, relative_error(dp, central_difference(f, p.data(), 3)));
                      }});

  families.push_back({"view-specific attention", kNonlinearTol, [](std::mt19937_64& rng) {
                        auto g = random_triplane<GeometryTag>(7, 3, rng);
                        auto m = VsaModule<double>::random(rng);
                        const auto w = random_triplane<GeometryTag>(7, 3, rng);
                        const auto map_w = random_plane(7, 1, Axis::Y, Axis::Z, rng);
                        const auto f = [&] {
                          const auto out = attend_triplane(m, g);
                          return weighted_sum(out.attended, w) + out.yz.values.data().dot(map_w.data());
                        };
                        const auto grads = vsa_backward(m, g, &w, {nullptr, nullptr, &map_w});
                        std::vector<std::pair<double*, Index>> params;
                        std::vector<VectorX<double>> analytic;
                        for (int k = 0; k < 3; ++k) {
                          params.emplace_back(m.kernels()[k]->weights.data(), 98);
                          analytic.push_back(grads.kernels.kernels()[k]->weights);
                          params.emplace_back(g.planes()[k]->data().data(), g.planes()[k]->size());
                          analytic.push_back(grads.planes.planes()[k]->data());
                        }
                        return worst_over_blocks(f, params, analytic);
                      }});

  families.push_back({"feature symmetry regularizer", kLinearTol, [](std::mt19937_64& rng) {
                        auto g = random_triplane<GeometryTag>(6, 3, rng);
                        const auto f = [&] { return feature_symmetry_loss(g).value; };
                        auto grad = g.zeros_like();
                        feature_symmetry_backward(g, 1.0, grad);
                        return worst_over_blocks(
                            f, {{g.xy.data().data(), g.xy.size()}, {g.xz.data().data(), g.xz.size()},
                                {g.yz.data().data(), g.yz.size()}},
                            {grad.xy.data(), grad.xz.data(), grad.yz.data()});
                      }});

  families.push_back({"attention symmetry regularizer", kNonlinearTol, [](std::mt19937_64& rng) {
                        auto g = random_triplane<GeometryTag>(7, 3, rng);
                        auto m = VsaModule<double>::random(rng);
                        const auto f = [&] {
                          const auto out = attend_triplane(m, g);
                          return attention_symmetry_loss(out.yz, out.xz).value;
                        };
                        const auto out = attend_triplane(m, g);
                        const auto [dyz, dxz] = attention_symmetry_backward(out.yz, out.xz, 1.0);
                        const auto grads = vsa_backward<double>(m, g, nullptr, {nullptr, &dxz, &dyz});
                        std::vector<std::pair<double*, Index>> params;
                        std::vector<VectorX<double>> analytic;
                        for (int k = 0; k < 3; ++k) {
                          params.emplace_back(m.kernels()[k]->weights.data(), 98);
                          analytic.push_back(grads.kernels.kernels()[k]->weights);
                          params.emplace_back(g.planes()[k]->data().data(), g.planes()[k]->size());
                          analytic.push_back(grads.planes.planes()[k]->data());
                        }
                        return worst_over_blocks(f, params, analytic);
                      }});

  families.push_back({"decoders", kNonlinearTol, [](std::mt19937_64& rng) {
                        double worst = 0;
                        for (auto head : {HeadKind::SdfDeform, HeadKind::Color}) {
                          auto dec = MlpDecoder<double>::random(head, 4, 6, rng);
                          std::uniform_real_distribution<double> d(-1, 1);
                          for (Index q = 0; q < dec.w3.size(); ++q) dec.w3.data()[q] = d(rng);
                          MatrixX<double> x(4, 3), up(head_width(head), 3);
                          for (Index q = 0; q < x.size(); ++q) x.data()[q] = d(rng);
                          for (Index q = 0; q < up.size(); ++q) up.data()[q] = d(rng);
                          const auto f = [&] { return decode_batch(dec, x).out.cwiseProduct(up).sum(); };
                          const auto g = decoder_backward(dec, x, decode_batch(dec, x), up);
                          auto ga = g.params;
                          std::vector<std::pair<double*, Index>> params;
                          std::vector<VectorX<double>> analytic;
                          auto blocks = dec.parameter_blocks();
                          const auto gblocks = ga.parameter_blocks();
                          for (std::size_t b = 0; b < blocks.size(); ++b) {
                            params.emplace_back(blocks[b].data(), blocks[b].size());
                            analytic.push_back(gblocks[b]);
                          }
                          params.emplace_back(x.data(), x.size());
                          analytic.push_back(Eigen::Map<const VectorX<double>>(g.features.data(), g.features.size()));
                          worst = std::max(worst, worst_over_blocks(f, params, analytic));
                        }
                        return worst;
                      }});

  families.push_back({"fit loss end to end", kNonlinearTol, [](std::mt19937_64& rng) {
                        auto m = SceneModel<double>::random(5, 2, 5, 0.5, rng);
                        m.use_vsa = rng() % 4 != 0;
                        m.use_tex_sym = rng() % 2 == 0;
                        std::uniform_real_distribution<double> d(-0.95, 0.95);
                        for (Index q = 0; q < m.sdf_decoder.w3.size(); ++q) m.sdf_decoder.w3.data()[q] = d(rng);
                        FitBatch<double> b;
                        b.sdf_points.resize(3, 8);
                        b.sdf_targets.resize(8);
                        b.color_points.resize(3, 4);
                        b.color_targets.resize(3, 4);
                        for (Index k = 0; k < 8; ++k) {
                          b.sdf_points.col(k) = random_point(rng, -0.95, 0.95);
                          b.sdf_targets[k] = d(rng);
                        }
                        for (Index k = 0; k < 4; ++k) {
                          b.color_points.col(k) = random_point(rng, -0.95, 0.95);
                          b.color_targets.col(k) = Vec3(0.5, 0.5, 0.5) + 0.4 * random_point(rng);
                        }
                        const double alpha = 0.5 + d(rng), beta = 2.0 + d(rng);
                        const auto f = [&] { return evaluate_fit(m, b, alpha, beta, 0.7).total; };
                        auto ev = evaluate_fit(m, b, alpha, beta, 0.7);
                        auto blocks = m.parameter_blocks();
                        const auto gblocks = ev.grads.parameter_blocks();
                        std::vector<std::pair<double*, Index>> params;
                        std::vector<VectorX<double>> analytic;
                        for (std::size_t k = 0; k < blocks.size(); ++k) {
                          params.emplace_back(blocks[k].data(), blocks[k].size());
                          analytic.push_back(gblocks[k]);
                        }
                        return worst_over_blocks(f, params, analytic);
                      }});

  const auto started = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  std::mt19937_64 rng(2024);
  for (const auto& fam : families) {
    double worst = 0;
    for (int c = 0; c < kGradientConfigs; ++c) worst = std::max(worst, fam.worst_error(rng));
    const bool fam_ok = worst <= fam.tol;
    ok = ok && fam_ok;
    std::printf("      %-32s worst rel. err %.2e over %d configs (tol %.0e)%s\n", fam.name.c_str(), worst,
                kGradientConfigs, fam.tol, fam_ok ? "" : "  <-- over tolerance");
  }
  detail = std::to_string(families.size()) + " families x " + std::to_string(kGradientConfigs) + " configs, " +
           fmt("%.1f s", seconds_since(started));
  report("Gradient suite vs central differences", ok, detail);
}

bool reflection_matches(const std::vector<Vec3>& a, double tol) {
  std::vector<bool> used(a.size(), false);
  for (const Vec3& p : a) {
    const Vec3 r(p.x(), p.y(), -p.z());
    std::size_t best = a.size();
    double best_d = tol;
    for (std::size_t q = 0; q < a.size(); ++q) {
      if (used[q]) continue;
      const double d = (a[q] - r).cwiseAbs().maxCoeff();
      if (d <= best_d) {
        best_d = d;
        best = q;
      }
    }
    if (best == a.size()) return false;
    used[best] = true;
  }
  return true;
}

void check_symmetry() {
  std::mt19937_64 rng(7);
  bool even = true;
  const auto t = random_triplane<TextureTag>(16, 8, rng);
  for (int k = 0; k < 10000; ++k) {
    const Vec3 p = random_point(rng);
    even = even && (query_texture_symmetric(t, p) == query_texture_symmetric(t, Vec3(p.x(), p.y(), -p.z())));
  }

  bool losses = true;
  for (int trial = 0; trial < 10; ++trial) {
    auto g = random_triplane<GeometryTag>(8, 3, rng);
    losses = losses && feature_symmetry_loss(g).value > 0;
    const auto a = attend_triplane(VsaModule<double>::random(rng), g);
    losses = losses && attention_symmetry_loss(a.yz, a.xz).value > 0;
    sym3d::testing::symmetrize(g.xz);
    sym3d::testing::symmetrize(g.yz);
    losses = losses && feature_symmetry_loss(g).value == 0;
    AttentionMap<double> yz{random_plane(8, 1, Axis::Y, Axis::Z, rng)}, xz{random_plane(8, 1, Axis::X, Axis::Z, rng)};
    sym3d::testing::symmetrize(yz.values);
    sym3d::testing::symmetrize(xz.values);
    losses = losses && attention_symmetry_loss(yz, xz).value == 0;
  }

  auto m = SceneModel<double>::random(8, 4, 16, 0.5, rng);
  sym3d::testing::symmetrize(m.geometry.xz);
  sym3d::testing::symmetrize(m.geometry.yz);
  for (auto* k : m.vsa.kernels()) k->weights.setZero();
  auto sdf = populate(build_tet_grid(16), m).sdf;
  std::nth_element(sdf.begin(), sdf.begin() + sdf.size() / 2, sdf.end());
  m.sdf_decoder.b3[0] -= sdf[sdf.size() / 2] + 1e-7;
  const auto mesh = marching_tets(populate(build_tet_grid(16), m));
  const bool mirrored = !mesh.empty() && reflection_matches(mesh.vertices, kMirrorTol);

  report("Symmetry exactness", even && losses && mirrored,
         std::string("texture query even over 1e4 points: ") + (even ? "yes" : "no") +
             "; regularizers zero/positive: " + (losses ? "yes" : "no") + "; mirrored mesh (" +
             std::to_string(mesh.vertices.size()) + " vertices): " + (mirrored ? "yes" : "no"));
}

void check_marching_tets() {
  constexpr int kR = 24;
  const auto sphere = marching_tets(populate(build_tet_grid(kR), [](const Vec3& p) { return p.norm() - 0.5; }));
  const auto topo = mesh_topology(sphere);
  double radial = 0;
  for (const auto& v : sphere.vertices) radial = std::max(radial, std::abs(v.norm() - 0.5));
  const auto plane = marching_tets(populate(build_tet_grid(8), [](const Vec3& p) { return p.z(); }));
  double flat = 0;
  for (const auto& v : plane.vertices) flat = std::max(flat, std::abs(v.z()));
  const bool ok = topo.watertight() && topo.euler_characteristic() == 2 && radial <= 2 * std::sqrt(3.0) / kR &&
                  !plane.empty() && flat <= kPlaneTol;
  report("Marching-tets oracle", ok,
         "sphere watertight " + std::string(topo.watertight() ? "yes" : "no") +
             ", chi " + std::to_string(topo.euler_characteristic()) + fmt(", radial err %.3g", radial) +
             fmt(" (bound %.3g)", 2 * std::sqrt(3.0) / kR) + fmt("; plane max |z| %.2g", flat));
}

void check_worked_examples() {
  const double d1 = gan_d_loss({{0.5}, {0.5}, {0.0}}, 10.0);
  const double d2 = gan_d_loss({{0.9}, {0.1}, {}}, 0.0);
  const double g1 = gan_g_loss(std::vector<double>{0.5}, 0.01, 0.002, 100.0, 10.0);
  const double e1 = std::abs(d1 - 2 * std::log(2.0));
  const double e2 = std::abs(d2 + 2 * std::log(0.9));
  const double e3 = std::abs(g1 - (std::log(2.0) + 1.0 + 0.02));
  const double worst = std::max({e1, e2, e3});
  report("Objective worked examples", worst <= kWorkedExampleTol,
         fmt("%.6f, ", d1) + fmt("%.6f, ", d2) + fmt("%.6f; ", g1) + fmt("max abs err %.2g", worst));
}

void check_metrics() {
  std::mt19937_64 rng(11);
  std::vector<PointCloud> gen, ref;
  for (int k = 0; k < 12; ++k) gen.push_back(sym3d::testing::random_cloud(100, rng));
  for (int k = 0; k < 10; ++k) ref.push_back(sym3d::testing::random_cloud(100, rng));
  // plant near-copies so coverage is not trivially 1/|ref|
  for (int k = 0; k < 4; ++k) {
    gen[k] = ref[2 * k];
    gen[k].points.array() += 1e-3;
  }
  double worst_chamfer = 0;
  for (const auto& g : gen)
    for (const auto& r : ref)
      worst_chamfer = std::max(worst_chamfer, std::abs(chamfer(g, r) - sym3d::testing::brute_chamfer(g, r)));
  const double cov = coverage(gen, ref), cov_ref = sym3d::testing::brute_coverage(gen, ref);
  const double m = mmd(gen, ref), m_ref = sym3d::testing::brute_mmd(gen, ref);
  const bool ok = worst_chamfer <= kMetricTol && cov == cov_ref && std::abs(m - m_ref) <= kMetricTol;
  report("Metric oracles vs brute force", ok,
         fmt("chamfer max err %.2g, ", worst_chamfer) + fmt("COV %.3f ", cov) + fmt("(oracle %.3f), ", cov_ref) +
             fmt("MMD err %.2g", std::abs(m - m_ref)));
}

void check_central_claim() {
  const auto started = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (auto shape : {ShapeKind::CapsuleChair, ShapeKind::Winged}) {
    std::vector<double> hid_sym, hid_off, vis_sym, vis_off;
    for (int seed = 0; seed < kSeeds; ++seed) {
      const std::string tag = std::string(shape_name(shape)) + " seed " + std::to_string(seed);
      const auto s = fit_logged(experiment_config(shape, "0:120", 100, 10, seed), tag + " a=100 b=10");
      const auto o = fit_logged(experiment_config(shape, "0:120", 0, 0, seed), tag + " a=0 b=0");
      hid_sym.push_back(s.chamfer_hidden.value_or(INFINITY));
      hid_off.push_back(o.chamfer_hidden.value_or(INFINITY));
      vis_sym.push_back(s.chamfer_visible);
      vis_off.push_back(o.chamfer_visible);
    }
    const double hs = median(hid_sym), ho = median(hid_off), vs = median(vis_sym), vo = median(vis_off);
    const bool shape_ok = std::isfinite(hs) && hs < ho && vs <= kVisibleSlack * vo;
    ok = ok && shape_ok;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(shape_name(shape)) +
              fmt(": hidden %.4g", hs) + fmt(" vs %.4g", ho) + fmt(", visible ratio %.2f", vs / vo);
  }
  detail += fmt(", %.0f s", seconds_since(started));
  report("Central claim: symmetry improves hidden region", ok, detail);
}

void check_ablation() {
  struct Row {
    const char* name;
    double alpha, beta;
    bool vsa, tex;
  };
  const Row rows[] = {{"all on", 100, 10, true, true},
                      {"no VSA", 100, 10, false, true},
                      {"no R(G)", 0, 10, true, true},
                      {"no R(A)", 100, 0, true, true},
                      {"no texture symmetry", 100, 10, true, false}};
  std::vector<double> medians;
  for (const auto& row : rows) {
    std::vector<double> totals;
    for (int seed = 0; seed < kSeeds; ++seed) {
      auto cfg = experiment_config(ShapeKind::CapsuleChair, "0:360", row.alpha, row.beta, seed);
      cfg.use_vsa = row.vsa;
      cfg.use_tex_sym = row.tex;
      totals.push_back(fit_logged(cfg, std::string(row.name) + " seed " + std::to_string(seed)).chamfer_total);
    }
    medians.push_back(median(totals));
  }
  const bool ok = std::all_of(medians.begin() + 1, medians.end(), [&](double m) { return medians[0] <= m; });
  std::string detail = "median chamfer_total:";
  for (std::size_t k = 0; k < medians.size(); ++k) detail += std::string(" ") + rows[k].name + fmt(" %.4g", medians[k]);
  report("Ablation ordering (full view, capsule-chair)", ok, detail, /*soft=*/true);
}

void check_determinism() {
  auto cfg = experiment_config(ShapeKind::Winged, "0:120", 100, 10, 5);
  cfg.steps = 300;
  const auto a = summary_bytes(run_fit(cfg).report);
  const auto b = summary_bytes(run_fit(cfg).report);
  report("Determinism of fit reports", a == b,
         std::to_string(a.size()) + " CSV bytes, " + (a == b ? "identical" : "different"));
}

}  // namespace

int main() {
  const auto started = std::chrono::steady_clock::now();
  check_vsa_size();
  check_gradients();
  check_symmetry();
  check_marching_tets();
  check_worked_examples();
  check_metrics();
  check_central_claim();
  check_ablation();
  check_determinism();
  std::printf("acceptance: %d hard failure(s), %.0f s\n", hard_failures, seconds_since(started));
  return hard_failures == 0 ? 0 : 1;
}
