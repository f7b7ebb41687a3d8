#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "sym3d/regularizers.hpp"

namespace sym3d {

/// Discriminator outputs for one batch plus the per-real-sample squared
/// gradient norms used by the R1 penalty.
struct GanBatchOutputs {
  std::vector<double> d_real;
  std::vector<double> d_fake;
  std::vector<double> grad_norm_sq_real;
};

namespace detail {

inline double mean_checked(std::span<const double> v, const char* what) {
  if (v.empty()) throw InvalidInput(std::string(what) + ": empty batch");
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline void check_probabilities(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!(x > 0.0 && x < 1.0)) throw InvalidInput(std::string(what) + ": outputs must lie in (0,1)");
  }
}

}  // namespace detail

/// L_D = -E[log(1 - D(I_f))] - E[log D(I_r)] + lambda E[||grad D(I_r)||^2],
/// expectations are batch means.
inline double gan_d_loss(const GanBatchOutputs& b, double lambda) {
  detail::check_probabilities(b.d_real, "gan_d_loss");
  detail::check_probabilities(b.d_fake, "gan_d_loss");
  if (lambda < 0) throw InvalidInput("gan_d_loss: lambda must be nonnegative");
  for (double g : b.grad_norm_sq_real) {
    if (!(g >= 0)) throw InvalidInput("gan_d_loss: gradient norms must be nonnegative");
  }
  std::vector<double> fake_term(b.d_fake.size()), real_term(b.d_real.size());
  for (std::size_t k = 0; k < b.d_fake.size(); ++k) fake_term[k] = -std::log(1.0 - b.d_fake[k]);
  for (std::size_t k = 0; k < b.d_real.size(); ++k) real_term[k] = -std::log(b.d_real[k]);
  double loss = detail::mean_checked(fake_term, "gan_d_loss") + detail::mean_checked(real_term, "gan_d_loss");
  if (!b.grad_norm_sq_real.empty()) loss += lambda * detail::mean_checked(b.grad_norm_sq_real, "gan_d_loss");
  return loss;
}

/// L_G = -E[log D(I_f)] + alpha R(G) + beta R(A).
inline double gan_g_loss(std::span<const double> d_fake, double rg, double ra, double alpha, double beta) {
  detail::check_probabilities(d_fake, "gan_g_loss");
  if (rg < 0 || ra < 0) throw InvalidInput("gan_g_loss: regularizer values must be nonnegative");
  std::vector<double> term(d_fake.size());
  for (std::size_t k = 0; k < d_fake.size(); ++k) term[k] = -std::log(d_fake[k]);
  return detail::mean_checked(term, "gan_g_loss") + alpha * rg + beta * ra;
}

/// Result of the desk-scale fitting objective
///   mean((pred - target)^2) + alpha R(G) + beta R(A)
/// with the gradient pieces each module backward needs.
template <typename Scalar>
struct FitLoss {
  Scalar value = 0;
  Scalar regression = 0;
  SymmetryLossValue<Scalar> rg;
  SymmetryLossValue<Scalar> ra;
  VectorX<Scalar> dpred;                       // d value / d pred
  GeometryTriplane<Scalar> dplanes;            // alpha * dR(G)/dG
  std::optional<FeaturePlane<Scalar>> dmap_yz;  // beta * dR(A)/dA_yz
  std::optional<FeaturePlane<Scalar>> dmap_xz;
};

/// `a_yz`/`a_xz` may be null when attention is disabled; R(A) is then 0.
template <typename Scalar>
FitLoss<Scalar> fit_loss(std::span<const Scalar> pred, std::span<const Scalar> target,
                         const GeometryTriplane<Scalar>& g, const AttentionMap<Scalar>* a_yz,
                         const AttentionMap<Scalar>* a_xz, Scalar alpha, Scalar beta) {
  if (pred.size() != target.size()) throw ShapeError("fit_loss: prediction/target length mismatch");
  if (pred.empty()) throw InvalidInput("fit_loss: no supervision points");
  if ((a_yz == nullptr) != (a_xz == nullptr)) throw InvalidInput("fit_loss: pass both attention maps or neither");

  FitLoss<Scalar> r{Scalar(0), Scalar(0), {}, {}, {}, g.zeros_like(), std::nullopt, std::nullopt};
  const Index b = static_cast<Index>(pred.size());
  Eigen::Map<const VectorX<Scalar>> p(pred.data(), b), t(target.data(), b);
  const VectorX<Scalar> diff = p - t;
  r.regression = diff.squaredNorm() / Scalar(b);
  r.dpred = (Scalar(2) / Scalar(b)) * diff;

  r.rg = feature_symmetry_loss(g);
  if (alpha != Scalar(0)) feature_symmetry_backward(g, alpha, r.dplanes);
  if (a_yz != nullptr) {
    r.ra = attention_symmetry_loss(*a_yz, *a_xz);
    if (beta != Scalar(0)) {
      auto [dyz, dxz] = attention_symmetry_backward(*a_yz, *a_xz, beta);
      r.dmap_yz = std::move(dyz);
      r.dmap_xz = std::move(dxz);
    }
  }
  r.value = r.regression + alpha * r.rg.value + beta * r.ra.value;
  return r;
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Scalar>
struct AdamState {
  VectorX<Scalar> m;
  VectorX<Scalar> v;
  std::int64_t step = 0;
};

/// Bias-corrected adaptive-moment update of one parameter block.
template <typename Scalar>
void adam_step(Eigen::Ref<VectorX<Scalar>> params, const Eigen::Ref<const VectorX<Scalar>>& grads,
               AdamState<Scalar>& state, const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient size mismatch");
  if (state.step == 0 && state.m.size() == 0) {
    state.m = VectorX<Scalar>::Zero(params.size());
    state.v = VectorX<Scalar>::Zero(params.size());
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: optimizer state size mismatch");
  const Scalar b1 = Scalar(cfg.beta1), b2 = Scalar(cfg.beta2);
  ++state.step;
  state.m = b1 * state.m + (Scalar(1) - b1) * grads;
  state.v = b2 * state.v + (Scalar(1) - b2) * grads.cwiseAbs2();
  const Scalar c1 = Scalar(1) - std::pow(b1, Scalar(state.step));
  const Scalar c2 = Scalar(1) - std::pow(b2, Scalar(state.step));
  const Scalar lr = Scalar(cfg.lr);
  params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + Scalar(cfg.eps));
}

}  // namespace sym3d
