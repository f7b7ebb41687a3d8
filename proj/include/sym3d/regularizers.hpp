#pragma once

#include <span>
#include <vector>

#include "sym3d/vsa.hpp"

namespace sym3d {

/// Total plus the two per-plane terms (yz first, then xz).
template <typename Scalar>
struct SymmetryLossValue {
  Scalar value = 0;
  Scalar yz = 0;
  Scalar xz = 0;
};

/// ||P - flip_z(P)||^2 as a raw sum of squares.
template <typename Scalar>
Scalar plane_asymmetry(const FeaturePlane<Scalar>& p) {
  return (p.data() - flip_z(p).data()).squaredNorm();
}

/// grad += scale * d/dP ||P - flip P||^2 = scale * 4 (P - flip P).
template <typename Scalar>
void plane_asymmetry_backward(const FeaturePlane<Scalar>& p, Scalar scale, FeaturePlane<Scalar>& grad) {
  grad.data() += (Scalar(4) * scale) * (p.data() - flip_z(p).data());
}

/// Feature symmetry: ||G_yz - flip G_yz||^2 + ||G_xz - flip G_xz||^2. The xy
/// plane is the mirror plane and is not penalized.
template <typename Scalar>
SymmetryLossValue<Scalar> feature_symmetry_loss(const GeometryTriplane<Scalar>& g) {
  SymmetryLossValue<Scalar> r;
  r.yz = plane_asymmetry(g.yz);
  r.xz = plane_asymmetry(g.xz);
  r.value = r.yz + r.xz;
  return r;
}

/// Adds scale * dR(G)/dG into `grad`; grad.xy is untouched.
template <typename Scalar>
void feature_symmetry_backward(const GeometryTriplane<Scalar>& g, Scalar scale,
                               GeometryTriplane<Scalar>& grad) {
  plane_asymmetry_backward(g.yz, scale, grad.yz);
  plane_asymmetry_backward(g.xz, scale, grad.xz);
}

template <typename Scalar>
SymmetryLossValue<Scalar> attention_symmetry_loss(const AttentionMap<Scalar>& a_yz,
                                                  const AttentionMap<Scalar>& a_xz) {
  SymmetryLossValue<Scalar> r;
  r.yz = plane_asymmetry(a_yz.values);
  r.xz = plane_asymmetry(a_xz.values);
  r.value = r.yz + r.xz;
  return r;
}

/// Gradient of scale * R(A) wrt the two maps, as one-channel planes.
template <typename Scalar>
std::pair<FeaturePlane<Scalar>, FeaturePlane<Scalar>> attention_symmetry_backward(
    const AttentionMap<Scalar>& a_yz, const AttentionMap<Scalar>& a_xz, Scalar scale) {
  auto dyz = a_yz.values.zeros_like();
  auto dxz = a_xz.values.zeros_like();
  plane_asymmetry_backward(a_yz.values, scale, dyz);
  plane_asymmetry_backward(a_xz.values, scale, dxz);
  return {std::move(dyz), std::move(dxz)};
}

/// Sum of the feature symmetry loss over a pyramid of triplanes.
template <typename Scalar>
SymmetryLossValue<Scalar> multiscale_feature_symmetry_loss(
    std::span<const GeometryTriplane<Scalar>> scales) {
  if (scales.empty()) throw InvalidInput("multiscale_feature_symmetry_loss: no scales");
  SymmetryLossValue<Scalar> total;
  for (const auto& g : scales) {
    const auto r = feature_symmetry_loss(g);
    total.yz += r.yz;
    total.xz += r.xz;
    total.value += r.value;
  }
  return total;
}

}  // namespace sym3d
