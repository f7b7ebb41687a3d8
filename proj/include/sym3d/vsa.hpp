#pragma once

#include <array>
#include <optional>
#include <random>

#include "sym3d/triplane.hpp"

namespace sym3d {

/// 7x7 convolution over the (mean, max) pooled maps, one output channel, no
/// bias. Weights are stored row-major over (row offset, column offset,
/// pooled channel), pooled channel 0 = mean, 1 = max.
template <typename Scalar>
struct VsaKernel {
  static constexpr Index kSize = 7;
  static constexpr Index kRadius = 3;
  static constexpr Index kInputs = 2;
  static constexpr Index kCount = kSize * kSize * kInputs;

  using Weights = Eigen::Matrix<Scalar, kCount, 1>;
  Weights weights = Weights::Zero();

  static constexpr Index index(Index a, Index b, Index ch) { return (a * kSize + b) * kInputs + ch; }
  Scalar operator()(Index a, Index b, Index ch) const { return weights[index(a, b, ch)]; }
  Scalar& operator()(Index a, Index b, Index ch) { return weights[index(a, b, ch)]; }
};

/// Per-plane attention, values in (0,1). Stored as a one-channel plane so it
/// carries the source plane's axes and can be flipped like one.
template <typename Scalar>
struct AttentionMap {
  FeaturePlane<Scalar> values;

  Index resolution() const { return values.resolution(); }
  Scalar operator()(Index i, Index j) const { return values(i, j, 0); }
};

/// One kernel per geometry plane, in xy, xz, yz order.
template <typename Scalar>
struct VsaModule {
  VsaKernel<Scalar> xy, xz, yz;

  std::array<VsaKernel<Scalar>*, 3> kernels() { return {&xy, &xz, &yz}; }
  std::array<const VsaKernel<Scalar>*, 3> kernels() const { return {&xy, &xz, &yz}; }

  static constexpr Index parameter_count() { return 3 * VsaKernel<Scalar>::kCount; }

  /// Uniform in [-1/sqrt(98), 1/sqrt(98)].
  template <typename Rng>
  static VsaModule random(Rng& rng) {
    const Scalar bound = Scalar(1) / std::sqrt(Scalar(VsaKernel<Scalar>::kCount));
    std::uniform_real_distribution<Scalar> dist(-bound, bound);
    VsaModule m;
    for (auto* k : m.kernels())
      for (Index q = 0; q < VsaKernel<Scalar>::kCount; ++q) k->weights[q] = dist(rng);
    return m;
  }
};

/// Operation counts for one attend_triplane forward at resolution N with C
/// channels. `conv_macs` is the count the module adds on top of a plain
/// triplane: 3 planes x 98 weights x N^2 outputs.
struct VsaOpCount {
  std::int64_t conv_macs = 0;
  std::int64_t pooling_ops = 0;
  std::int64_t sigmoid_ops = 0;
  std::int64_t modulation_macs = 0;

  std::int64_t total() const { return conv_macs + pooling_ops + sigmoid_ops + modulation_macs; }
};

inline VsaOpCount vsa_op_count(std::int64_t n, std::int64_t c) {
  VsaOpCount ops;
  const std::int64_t pixels = n * n;
  ops.conv_macs = 3 * VsaKernel<double>::kCount * pixels;
  ops.pooling_ops = 3 * 2 * c * pixels;
  ops.sigmoid_ops = 3 * pixels;
  ops.modulation_macs = 3 * c * pixels;
  return ops;
}

namespace detail {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct AttentionForward {
  std::array<RowMatrix<Scalar>, 2> pooled;  // mean, max
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> argmax;
  RowMatrix<Scalar> attention;
};

template <typename Scalar>
AttentionForward<Scalar> attention_forward(const VsaKernel<Scalar>& kernel,
                                           const FeaturePlane<Scalar>& plane) {
  const Index n = plane.resolution();
  const Index c = plane.channels();
  constexpr Index K = VsaKernel<Scalar>::kSize;
  constexpr Index R = VsaKernel<Scalar>::kRadius;

  AttentionForward<Scalar> f;
  f.pooled[0].resize(n, n);
  f.pooled[1].resize(n, n);
  f.argmax.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const auto v = plane.node(i, j);
      Scalar sum = 0;
      Index best = 0;
      for (Index ch = 0; ch < c; ++ch) {
        sum += v[ch];
        if (v[ch] > v[best]) best = ch;  // strict: ties keep the lowest channel
      }
      f.pooled[0](i, j) = sum / Scalar(c);
      f.pooled[1](i, j) = v[best];
      f.argmax(i, j) = best;
    }
  }

  f.attention.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      Scalar acc = 0;
      for (Index a = 0; a < K; ++a) {
        const Index p = i + a - R;
        if (p < 0 || p >= n) continue;
        for (Index b = 0; b < K; ++b) {
          const Index q = j + b - R;
          if (q < 0 || q >= n) continue;
          acc += kernel(a, b, 0) * f.pooled[0](p, q);
          acc += kernel(a, b, 1) * f.pooled[1](p, q);
        }
      }
      f.attention(i, j) = sigmoid(acc);
    }
  }
  return f;
}

template <typename Scalar>
AttentionMap<Scalar> to_map(const RowMatrix<Scalar>& a, const FeaturePlane<Scalar>& plane) {
  const Index n = plane.resolution();
  FeaturePlane<Scalar> values(n, 1, plane.first_axis(), plane.second_axis(),
                              Eigen::Map<const VectorX<Scalar>>(a.data(), n * n));
  return {std::move(values)};
}

}  // namespace detail

/// A = sigmoid(conv7x7(mean_c(P) (+) max_c(P))), zero padding 3.
template <typename Scalar>
AttentionMap<Scalar> attention_map(const VsaKernel<Scalar>& kernel, const FeaturePlane<Scalar>& plane) {
  return detail::to_map(detail::attention_forward(kernel, plane).attention, plane);
}

/// out(i, j, c) = a(i, j) * plane(i, j, c).
template <typename Scalar>
FeaturePlane<Scalar> apply_attention(const AttentionMap<Scalar>& a, const FeaturePlane<Scalar>& plane) {
  if (a.resolution() != plane.resolution()) {
    throw ShapeError("apply_attention: attention map and plane resolution differ");
  }
  const Index n = plane.resolution();
  FeaturePlane<Scalar> out = plane;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out.node(i, j) *= a(i, j);
  return out;
}

/// Gradients of <upstream, apply_attention(a, plane)>.
template <typename Scalar>
std::pair<AttentionMap<Scalar>, FeaturePlane<Scalar>> apply_attention_backward(
    const AttentionMap<Scalar>& a, const FeaturePlane<Scalar>& plane,
    const FeaturePlane<Scalar>& upstream) {
  if (a.resolution() != plane.resolution() || upstream.size() != plane.size()) {
    throw ShapeError("apply_attention_backward: shape mismatch");
  }
  const Index n = plane.resolution();
  AttentionMap<Scalar> da{a.values.zeros_like()};
  FeaturePlane<Scalar> dplane = plane.zeros_like();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      da.values(i, j, 0) = upstream.node(i, j).dot(plane.node(i, j));
      dplane.node(i, j) = a(i, j) * upstream.node(i, j);
    }
  }
  return {std::move(da), std::move(dplane)};
}

template <typename Scalar>
struct AttendedTriplane {
  GeometryTriplane<Scalar> attended;
  AttentionMap<Scalar> xy, xz, yz;
};

/// Attention is computed from the original planes and multiplied into them.
template <typename Scalar>
AttendedTriplane<Scalar> attend_triplane(const VsaModule<Scalar>& m, const GeometryTriplane<Scalar>& g) {
  auto axy = attention_map(m.xy, g.xy);
  auto axz = attention_map(m.xz, g.xz);
  auto ayz = attention_map(m.yz, g.yz);
  GeometryTriplane<Scalar> att(apply_attention(axy, g.xy), apply_attention(axz, g.xz),
                               apply_attention(ayz, g.yz));
  return {std::move(att), std::move(axy), std::move(axz), std::move(ayz)};
}

template <typename Scalar>
struct VsaGradients {
  VsaModule<Scalar> kernels;
  GeometryTriplane<Scalar> planes;
};

namespace detail {

// Backward for one plane. `dattended` is the gradient wrt A (.) P, `dmap` an
// optional extra gradient wrt A. Adds into dkernel and dplane.
template <typename Scalar>
void plane_attention_backward(const VsaKernel<Scalar>& kernel, const FeaturePlane<Scalar>& plane,
                              const FeaturePlane<Scalar>* dattended, const FeaturePlane<Scalar>* dmap,
                              VsaKernel<Scalar>& dkernel, FeaturePlane<Scalar>& dplane) {
  const Index n = plane.resolution();
  const Index c = plane.channels();
  constexpr Index K = VsaKernel<Scalar>::kSize;
  constexpr Index R = VsaKernel<Scalar>::kRadius;
  const auto f = attention_forward(kernel, plane);

  // d/d(pre-sigmoid)
  RowMatrix<Scalar> dz = RowMatrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      Scalar da = 0;
      if (dattended != nullptr) {
        da += dattended->node(i, j).dot(plane.node(i, j));
        dplane.node(i, j) += f.attention(i, j) * dattended->node(i, j);
      }
      if (dmap != nullptr) da += (*dmap)(i, j, 0);
      const Scalar a = f.attention(i, j);
      dz(i, j) = da * a * (Scalar(1) - a);
    }
  }

  std::array<RowMatrix<Scalar>, 2> dpooled = {RowMatrix<Scalar>::Zero(n, n),
                                              RowMatrix<Scalar>::Zero(n, n)};
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Scalar g = dz(i, j);
      if (g == Scalar(0)) continue;
      for (Index a = 0; a < K; ++a) {
        const Index p = i + a - R;
        if (p < 0 || p >= n) continue;
        for (Index b = 0; b < K; ++b) {
          const Index q = j + b - R;
          if (q < 0 || q >= n) continue;
          for (Index ch = 0; ch < 2; ++ch) {
            dkernel(a, b, ch) += g * f.pooled[ch](p, q);
            dpooled[ch](p, q) += g * kernel(a, b, ch);
          }
        }
      }
    }
  }

  const Scalar inv_c = Scalar(1) / Scalar(c);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      dplane.node(i, j).array() += dpooled[0](i, j) * inv_c;
      dplane(i, j, f.argmax(i, j)) += dpooled[1](i, j);
    }
  }
}

}  // namespace detail

/// Backpropagates through pooling, convolution, sigmoid and modulation.
/// `dattended` is the gradient wrt the attended triplane; `dmaps` (xy, xz, yz)
/// are optional extra gradients wrt the attention maps. Max pooling routes
/// to the argmax channel, lowest index on ties.
template <typename Scalar>
VsaGradients<Scalar> vsa_backward(const VsaModule<Scalar>& m, const GeometryTriplane<Scalar>& g,
                                  const GeometryTriplane<std::type_identity_t<Scalar>>* dattended,
                                  const std::array<const FeaturePlane<Scalar>*, 3>& dmaps = {}) {
  VsaGradients<Scalar> out{VsaModule<Scalar>{}, g.zeros_like()};
  const auto kernels = m.kernels();
  const auto planes = g.planes();
  const auto dkernels = out.kernels.kernels();
  const auto dplanes = out.planes.planes();
  for (int p = 0; p < 3; ++p) {
    const FeaturePlane<Scalar>* da = dattended ? dattended->planes()[p] : nullptr;
    detail::plane_attention_backward(*kernels[p], *planes[p], da, dmaps[p], *dkernels[p], *dplanes[p]);
  }
  return out;
}

}  // namespace sym3d
