#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <tuple>
#include <type_traits>
#include <utility>

#include "sym3d/common.hpp"

namespace sym3d {

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };

inline char axis_label(Axis a) {
  return static_cast<char>('X' + static_cast<int>(a));
}

/// N x N x C grid of features over [-1,1]^2, node-centered.
///
/// Node (i, j) sits at (-1 + 2i/(N-1), -1 + 2j/(N-1)); `i` indexes the first
/// axis and `j` the second. Storage is row-major over (i, j, c).
template <typename Scalar>
class FeaturePlane {
 public:
  using Vector = VectorX<Scalar>;

  FeaturePlane(Index n, Index c, Axis first, Axis second)
      : FeaturePlane(n, c, first, second, Vector::Zero(n * n * c)) {}

  FeaturePlane(Index n, Index c, Axis first, Axis second, Vector data)
      : n_(n), c_(c), axes_{first, second}, data_(std::move(data)) {
    if (n < 2) throw InvalidInput("FeaturePlane: resolution must be >= 2");
    if (c < 1) throw InvalidInput("FeaturePlane: channels must be >= 1");
    if (first == second) throw InvalidInput("FeaturePlane: axes must be distinct");
    if (data_.size() != n * n * c) throw ShapeError("FeaturePlane: data length != N*N*C");
  }

  Index resolution() const { return n_; }
  Index channels() const { return c_; }
  Axis first_axis() const { return axes_[0]; }
  Axis second_axis() const { return axes_[1]; }
  Index size() const { return data_.size(); }

  Index offset(Index i, Index j) const { return (i * n_ + j) * c_; }

  Scalar& operator()(Index i, Index j, Index c) { return data_[offset(i, j) + c]; }
  Scalar operator()(Index i, Index j, Index c) const { return data_[offset(i, j) + c]; }

  auto node(Index i, Index j) { return data_.segment(offset(i, j), c_); }
  auto node(Index i, Index j) const { return data_.segment(offset(i, j), c_); }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  bool same_shape(const FeaturePlane& o) const {
    return n_ == o.n_ && c_ == o.c_ && axes_ == o.axes_;
  }

  FeaturePlane zeros_like() const { return FeaturePlane(n_, c_, axes_[0], axes_[1]); }

  static Scalar node_coord(Index i, Index n) {
    return Scalar(-1) + Scalar(2) * Scalar(i) / Scalar(n - 1);
  }

 private:
  Index n_;
  Index c_;
  std::array<Axis, 2> axes_;
  Vector data_;
};

/// Interpolation weights of one bilinear query: the four surrounding nodes,
/// their weights, and the weight derivatives wrt u and v. Weight derivatives
/// are zero along a clamped coordinate.
template <typename Scalar>
struct BilinearStencil {
  std::array<Index, 4> i{};
  std::array<Index, 4> j{};
  std::array<Scalar, 4> w{};
  std::array<Scalar, 4> dw_du{};
  std::array<Scalar, 4> dw_dv{};
};

namespace detail {

// Cell lookup along one axis. Returns lower node, fraction in [0,1] and
// dfraction/dcoord (0 when clamped).
template <typename Scalar>
inline void locate(Scalar coord, Index n, Index& lo, Scalar& frac, Scalar& dfrac) {
  const Scalar scale = Scalar(n - 1) / Scalar(2);
  bool clamped = false;
  if (coord < Scalar(-1)) {
    coord = Scalar(-1);
    clamped = true;
  } else if (coord > Scalar(1)) {
    coord = Scalar(1);
    clamped = true;
  }
  Scalar t = (coord + Scalar(1)) * scale;
  // node_coord() does not round-trip exactly; snap so nodes sample exactly
  const Scalar r = std::round(t);
  if (std::abs(t - r) <= Scalar(8) * std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), r)) t = r;
  lo = std::min<Index>(static_cast<Index>(std::floor(t)), n - 2);
  frac = t - Scalar(lo);
  dfrac = clamped ? Scalar(0) : scale;
}

}  // namespace detail

template <typename Scalar>
BilinearStencil<Scalar> bilinear_stencil(const FeaturePlane<Scalar>& plane, Scalar u, Scalar v) {
  if (!std::isfinite(u) || !std::isfinite(v)) {
    throw InvalidInput("bilinear_sample: non-finite coordinate");
  }
  const Index n = plane.resolution();
  Index i0, j0;
  Scalar fu, fv, dfu, dfv;
  detail::locate(u, n, i0, fu, dfu);
  detail::locate(v, n, j0, fv, dfv);

  BilinearStencil<Scalar> s;
  s.i = {i0, i0 + 1, i0, i0 + 1};
  s.j = {j0, j0, j0 + 1, j0 + 1};
  s.w = {(1 - fu) * (1 - fv), fu * (1 - fv), (1 - fu) * fv, fu * fv};
  s.dw_du = {-(1 - fv) * dfu, (1 - fv) * dfu, -fv * dfu, fv * dfu};
  s.dw_dv = {-(1 - fu) * dfv, -fu * dfv, (1 - fu) * dfv, fu * dfv};
  return s;
}

/// out += bilinear sample described by `s`.
template <typename Scalar, typename Out>
void accumulate_sample(const FeaturePlane<Scalar>& plane, const BilinearStencil<Scalar>& s,
                       Out&& out) {
  out += s.w[0] * plane.node(s.i[0], s.j[0]) + s.w[1] * plane.node(s.i[1], s.j[1]) +
         s.w[2] * plane.node(s.i[2], s.j[2]) + s.w[3] * plane.node(s.i[3], s.j[3]);
}

/// Bilinear interpolation of the C-vector at (u, v). Coordinates outside
/// [-1,1] clamp to the border.
template <typename Scalar>
VectorX<Scalar> bilinear_sample(const FeaturePlane<Scalar>& plane, Scalar u, Scalar v) {
  VectorX<Scalar> out = VectorX<Scalar>::Zero(plane.channels());
  accumulate_sample(plane, bilinear_stencil(plane, u, v), out);
  return out;
}

/// Adds w_k * upstream into the four stencil nodes of `grad` and returns
/// (d/du, d/dv) of <upstream, sample>.
template <typename Scalar, typename Upstream>
std::pair<Scalar, Scalar> accumulate_sample_backward(const FeaturePlane<Scalar>& plane,
                                                     const BilinearStencil<Scalar>& s,
                                                     const Upstream& upstream,
                                                     FeaturePlane<std::type_identity_t<Scalar>>* grad) {
  Scalar du = 0, dv = 0;
  for (int k = 0; k < 4; ++k) {
    if (s.dw_du[k] != Scalar(0) || s.dw_dv[k] != Scalar(0)) {
      const Scalar d = plane.node(s.i[k], s.j[k]).dot(upstream);
      du += s.dw_du[k] * d;
      dv += s.dw_dv[k] * d;
    }
    if (grad != nullptr) grad->node(s.i[k], s.j[k]) += s.w[k] * upstream;
  }
  return {du, dv};
}

template <typename Scalar>
struct NodeGradient {
  Index i = 0;
  Index j = 0;
  VectorX<Scalar> grad;
};

template <typename Scalar>
struct SampleGradient {
  std::array<NodeGradient<Scalar>, 4> nodes;
  Scalar du = 0;
  Scalar dv = 0;
};

/// Gradient of <upstream, bilinear_sample(plane, u, v)> wrt the plane (four
/// sparse node contributions) and the coordinates.
template <typename Scalar>
SampleGradient<Scalar> bilinear_sample_backward(const FeaturePlane<Scalar>& plane, Scalar u,
                                                Scalar v, const VectorX<Scalar>& upstream) {
  if (upstream.size() != plane.channels()) {
    throw ShapeError("bilinear_sample_backward: upstream length != C");
  }
  const auto s = bilinear_stencil(plane, u, v);
  SampleGradient<Scalar> g;
  std::tie(g.du, g.dv) = accumulate_sample_backward(plane, s, upstream, nullptr);
  for (int k = 0; k < 4; ++k) g.nodes[k] = {s.i[k], s.j[k], s.w[k] * upstream};
  return g;
}

/// Reverses the second (z-indexed) grid axis: out(i, j) = in(i, N-1-j).
template <typename Scalar>
FeaturePlane<Scalar> flip_z(const FeaturePlane<Scalar>& plane) {
  if (plane.second_axis() != Axis::Z) {
    throw AxisMismatch("flip_z: second plane axis must be Z");
  }
  const Index n = plane.resolution();
  FeaturePlane<Scalar> out = plane.zeros_like();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out.node(i, j) = plane.node(i, n - 1 - j);
  return out;
}

template <typename Scalar>
bool is_z_symmetric(const FeaturePlane<Scalar>& plane) {
  return plane.data() == flip_z(plane).data();
}

/// Channel-wise cosine similarity of three planes stacked as a 3C x N^2
/// matrix. Rows with zero norm have similarity 0 with everything.
template <typename Scalar>
MatrixX<Scalar> similarity_matrix(const FeaturePlane<Scalar>& a, const FeaturePlane<Scalar>& b,
                                  const FeaturePlane<Scalar>& c) {
  const Index n = a.resolution();
  const Index ch = a.channels();
  for (const auto* p : {&b, &c}) {
    if (p->resolution() != n || p->channels() != ch) {
      throw ShapeError("similarity_matrix: planes must share N and C");
    }
  }
  // Storage is (node, channel) row-major, so each plane maps to an N^2 x C
  // column block of the transposed stack.
  MatrixX<Scalar> stacked(n * n, 3 * ch);
  Index col = 0;
  for (const auto* p : {&a, &b, &c}) {
    stacked.middleCols(col, ch) =
        Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            p->data().data(), n * n, ch);
    col += ch;
  }
  VectorX<Scalar> inv_norm = stacked.colwise().norm().transpose();
  for (Index k = 0; k < inv_norm.size(); ++k) {
    inv_norm[k] = inv_norm[k] > Scalar(0) ? Scalar(1) / inv_norm[k] : Scalar(0);
  }
  MatrixX<Scalar> sim = inv_norm.asDiagonal() * (stacked.transpose() * stacked) *
                        inv_norm.asDiagonal();
  for (Index r = 0; r < sim.rows(); ++r) {
    if (inv_norm[r] > Scalar(0)) sim(r, r) = Scalar(1);
    for (Index k = r + 1; k < sim.cols(); ++k) {
      const Scalar v = std::clamp(Scalar(0.5) * (sim(r, k) + sim(k, r)), Scalar(-1), Scalar(1));
      sim(r, k) = v;
      sim(k, r) = v;
    }
  }
  return sim;
}

}  // namespace sym3d
