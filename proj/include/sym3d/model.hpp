#pragma once

#include <random>

#include "sym3d/field.hpp"
#include "sym3d/objective.hpp"

namespace sym3d {

template <typename Scalar>
using Points3 = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

/// Everything optimized for one scene: geometry triplane, its attention
/// kernels and sdf/deform decoder, plus the texture triplane and color
/// decoder. The same struct holds gradients.
template <typename Scalar>
struct SceneModel {
  GeometryTriplane<Scalar> geometry;
  VsaModule<Scalar> vsa;
  MlpDecoder<Scalar> sdf_decoder;
  TextureTriplane<Scalar> texture;
  MlpDecoder<Scalar> color_decoder;
  bool use_vsa = true;
  bool use_tex_sym = true;

  SceneModel(Index n, Index c, Index hidden)
      : geometry(n, c),
        sdf_decoder(MlpDecoder<Scalar>::zeros(HeadKind::SdfDeform, c, hidden)),
        texture(n, c),
        color_decoder(MlpDecoder<Scalar>::zeros(HeadKind::Color, c, hidden)) {}

  /// Planes uniform in [-plane_scale, plane_scale], kernels and decoders per
  /// their own initializers.
  template <typename Rng>
  static SceneModel random(Index n, Index c, Index hidden, Scalar plane_scale, Rng& rng) {
    SceneModel m(n, c, hidden);
    std::uniform_real_distribution<Scalar> dist(-plane_scale, plane_scale);
    for (auto* p : m.geometry.planes())
      for (Index q = 0; q < p->size(); ++q) p->data()[q] = dist(rng);
    m.vsa = VsaModule<Scalar>::random(rng);
    m.sdf_decoder = MlpDecoder<Scalar>::random(HeadKind::SdfDeform, c, hidden, rng);
    for (auto* p : m.texture.planes())
      for (Index q = 0; q < p->size(); ++q) p->data()[q] = dist(rng);
    m.color_decoder = MlpDecoder<Scalar>::random(HeadKind::Color, c, hidden, rng);
    return m;
  }

  SceneModel zeros_like() const {
    SceneModel z(geometry.resolution(), geometry.channels(), sdf_decoder.hidden_width());
    z.use_vsa = use_vsa;
    z.use_tex_sym = use_tex_sym;
    return z;
  }

  /// Views of every parameter array in a fixed order; used by the optimizer
  /// and by finite-difference checks.
  std::vector<Eigen::Map<VectorX<Scalar>>> parameter_blocks() {
    std::vector<Eigen::Map<VectorX<Scalar>>> blocks;
    for (auto* p : geometry.planes()) blocks.emplace_back(p->data().data(), p->size());
    for (auto* k : vsa.kernels()) blocks.emplace_back(k->weights.data(), k->weights.size());
    for (auto& b : sdf_decoder.parameter_blocks()) blocks.push_back(b);
    for (auto* p : texture.planes()) blocks.emplace_back(p->data().data(), p->size());
    for (auto& b : color_decoder.parameter_blocks()) blocks.push_back(b);
    return blocks;
  }
};

/// The planes the sdf decoder actually reads: attended when VSA is on.
template <typename Scalar>
struct GeometryForward {
  std::optional<AttendedTriplane<Scalar>> attention;
  const GeometryTriplane<Scalar>* planes = nullptr;
};

template <typename Scalar>
GeometryForward<Scalar> geometry_forward(const SceneModel<Scalar>& m) {
  GeometryForward<Scalar> f;
  if (m.use_vsa) {
    f.attention = attend_triplane(m.vsa, m.geometry);
    f.planes = &f.attention->attended;
  } else {
    f.planes = &m.geometry;
  }
  return f;
}

template <typename Scalar, typename Tag>
MatrixX<Scalar> gather_features(const Triplane<Scalar, Tag>& t, const Points3<Scalar>& points) {
  MatrixX<Scalar> f = MatrixX<Scalar>::Zero(t.channels(), points.cols());
  for (Index k = 0; k < points.cols(); ++k) {
    accumulate_query(t, triplane_stencil(t, Vector3<Scalar>(points.col(k))), f.col(k));
  }
  return f;
}

template <typename Scalar>
MatrixX<Scalar> gather_texture_features(const SceneModel<Scalar>& m, const Points3<Scalar>& points) {
  if (!m.use_tex_sym) return gather_features(m.texture, points);
  MatrixX<Scalar> f(m.texture.channels(), points.cols());
  for (Index k = 0; k < points.cols(); ++k) {
    f.col(k) = query_texture_symmetric(m.texture, Vector3<Scalar>(points.col(k)));
  }
  return f;
}

/// Decoded sdf (row 0) and tanh deform (rows 1-3) at each point.
template <typename Scalar>
MatrixX<Scalar> evaluate_geometry(const SceneModel<Scalar>& m, const Points3<Scalar>& points) {
  const auto fwd = geometry_forward(m);
  return decode_batch(m.sdf_decoder, gather_features(*fwd.planes, points)).out;
}

template <typename Scalar>
Points3<Scalar> evaluate_color(const SceneModel<Scalar>& m, const Points3<Scalar>& points) {
  return decode_batch(m.color_decoder, gather_texture_features(m, points)).out;
}

/// Supervision for one optimization step.
template <typename Scalar>
struct FitBatch {
  Points3<Scalar> sdf_points;
  VectorX<Scalar> sdf_targets;
  Points3<Scalar> color_points;  // may be empty
  Points3<Scalar> color_targets;
};

template <typename Scalar>
struct FitEvaluation {
  Scalar total = 0;
  FitLoss<Scalar> sdf;
  Scalar color = 0;
  SceneModel<Scalar> grads;
};

/// Value and full gradient of
///   mean((sdf - target)^2) + alpha R(G) + beta R(A) + color_weight * mean |rgb - target|^2.
template <typename Scalar>
FitEvaluation<Scalar> evaluate_fit(const SceneModel<Scalar>& m, const FitBatch<Scalar>& batch,
                                   Scalar alpha, Scalar beta, Scalar color_weight) {
  if (batch.sdf_points.cols() != batch.sdf_targets.size()) {
    throw ShapeError("evaluate_fit: sdf point/target count mismatch");
  }
  const auto fwd = geometry_forward(m);
  const MatrixX<Scalar> features = gather_features(*fwd.planes, batch.sdf_points);
  const auto cache = decode_batch(m.sdf_decoder, features);
  const VectorX<Scalar> pred = cache.out.row(0).transpose();

  const AttentionMap<Scalar>* a_yz = fwd.attention ? &fwd.attention->yz : nullptr;
  const AttentionMap<Scalar>* a_xz = fwd.attention ? &fwd.attention->xz : nullptr;
  FitEvaluation<Scalar> ev{.sdf = fit_loss<Scalar>({pred.data(), std::size_t(pred.size())},
                                                   {batch.sdf_targets.data(), std::size_t(pred.size())},
                                                   m.geometry, a_yz, a_xz, alpha, beta),
                           .grads = m.zeros_like()};
  ev.total = ev.sdf.value;

  MatrixX<Scalar> upstream = MatrixX<Scalar>::Zero(cache.out.rows(), cache.out.cols());
  upstream.row(0) = ev.sdf.dpred.transpose();
  const auto dec = decoder_backward(m.sdf_decoder, features, cache, upstream);
  ev.grads.sdf_decoder = dec.params;

  GeometryTriplane<Scalar> dread = m.geometry.zeros_like();
  for (Index k = 0; k < batch.sdf_points.cols(); ++k) {
    const Vector3<Scalar> p = batch.sdf_points.col(k);
    accumulate_query_backward(*fwd.planes, triplane_stencil(*fwd.planes, p), dec.features.col(k), &dread);
  }
  if (fwd.attention) {
    const FeaturePlane<Scalar>* dyz = ev.sdf.dmap_yz ? &*ev.sdf.dmap_yz : nullptr;
    const FeaturePlane<Scalar>* dxz = ev.sdf.dmap_xz ? &*ev.sdf.dmap_xz : nullptr;
    auto vg = vsa_backward(m.vsa, m.geometry, &dread, {nullptr, dxz, dyz});
    ev.grads.vsa = vg.kernels;
    ev.grads.geometry = std::move(vg.planes);
  } else {
    ev.grads.geometry = std::move(dread);
  }
  ev.grads.geometry += ev.sdf.dplanes;

  if (batch.color_points.cols() > 0) {
    const Index nc = batch.color_points.cols();
    const MatrixX<Scalar> tf = gather_texture_features(m, batch.color_points);
    const auto ccache = decode_batch(m.color_decoder, tf);
    const MatrixX<Scalar> cdiff = ccache.out - batch.color_targets;
    ev.color = cdiff.squaredNorm() / Scalar(nc);
    ev.total += color_weight * ev.color;
    const MatrixX<Scalar> cup = (Scalar(2) * color_weight / Scalar(nc)) * cdiff;
    const auto cdec = decoder_backward(m.color_decoder, tf, ccache, cup);
    ev.grads.color_decoder = cdec.params;
    for (Index k = 0; k < nc; ++k) {
      const Vector3<Scalar> p = batch.color_points.col(k);
      if (m.use_tex_sym) {
        query_texture_symmetric_backward(m.texture, p, cdec.features.col(k), &ev.grads.texture);
      } else {
        query_backward(m.texture, p, cdec.features.col(k), &ev.grads.texture);
      }
    }
  }
  return ev;
}

}  // namespace sym3d
