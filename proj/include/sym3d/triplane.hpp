#pragma once

#include <array>

#include "sym3d/planes.hpp"

namespace sym3d {

struct GeometryTag {};
struct TextureTag {};

/// Three axis-aligned planes (XY, XZ, YZ) of equal N and C. The tag keeps
/// geometry and texture triplanes from being mixed up.
template <typename Scalar, typename Tag>
struct Triplane {
  using Plane = FeaturePlane<Scalar>;

  Plane xy;
  Plane xz;
  Plane yz;

  Triplane(Index n, Index c)
      : xy(n, c, Axis::X, Axis::Y), xz(n, c, Axis::X, Axis::Z), yz(n, c, Axis::Y, Axis::Z) {}

  Triplane(Plane xy_, Plane xz_, Plane yz_)
      : xy(std::move(xy_)), xz(std::move(xz_)), yz(std::move(yz_)) {
    validate();
  }

  void validate() const {
    const auto check_axes = [](const Plane& p, Axis a, Axis b) {
      if (p.first_axis() != a || p.second_axis() != b) {
        throw AxisMismatch("Triplane: plane axes must be (X,Y), (X,Z), (Y,Z)");
      }
    };
    check_axes(xy, Axis::X, Axis::Y);
    check_axes(xz, Axis::X, Axis::Z);
    check_axes(yz, Axis::Y, Axis::Z);
    if (xz.resolution() != xy.resolution() || yz.resolution() != xy.resolution() ||
        xz.channels() != xy.channels() || yz.channels() != xy.channels()) {
      throw ShapeError("Triplane: planes must share N and C");
    }
  }

  Index resolution() const { return xy.resolution(); }
  Index channels() const { return xy.channels(); }

  std::array<Plane*, 3> planes() { return {&xy, &xz, &yz}; }
  std::array<const Plane*, 3> planes() const { return {&xy, &xz, &yz}; }

  Triplane zeros_like() const { return Triplane(resolution(), channels()); }

  Triplane& operator+=(const Triplane& o) {
    xy.data() += o.xy.data();
    xz.data() += o.xz.data();
    yz.data() += o.yz.data();
    return *this;
  }
};

template <typename Scalar>
using GeometryTriplane = Triplane<Scalar, GeometryTag>;
template <typename Scalar>
using TextureTriplane = Triplane<Scalar, TextureTag>;

/// Stencils of the three plane projections of one point (xy, xz, yz order).
template <typename Scalar>
struct TriplaneStencil {
  BilinearStencil<Scalar> xy, xz, yz;
};

template <typename Scalar, typename Tag>
TriplaneStencil<Scalar> triplane_stencil(const Triplane<Scalar, Tag>& t, const Vector3<Scalar>& p) {
  return {bilinear_stencil(t.xy, p.x(), p.y()), bilinear_stencil(t.xz, p.x(), p.z()),
          bilinear_stencil(t.yz, p.y(), p.z())};
}

template <typename Scalar, typename Tag, typename Out>
void accumulate_query(const Triplane<Scalar, Tag>& t, const TriplaneStencil<Scalar>& s, Out&& out) {
  accumulate_sample(t.xy, s.xy, out);
  accumulate_sample(t.xz, s.xz, out);
  accumulate_sample(t.yz, s.yz, out);
}

/// Scatters `upstream` into `grad` through the three stencils and returns
/// d<upstream, feature>/dp.
template <typename Scalar, typename Tag, typename Upstream>
Vector3<Scalar> accumulate_query_backward(const Triplane<Scalar, Tag>& t,
                                          const TriplaneStencil<Scalar>& s,
                                          const Upstream& upstream, Triplane<std::type_identity_t<Scalar>, Tag>* grad) {
  const auto [xy_u, xy_v] = accumulate_sample_backward(t.xy, s.xy, upstream, grad ? &grad->xy : nullptr);
  const auto [xz_u, xz_v] = accumulate_sample_backward(t.xz, s.xz, upstream, grad ? &grad->xz : nullptr);
  const auto [yz_u, yz_v] = accumulate_sample_backward(t.yz, s.yz, upstream, grad ? &grad->yz : nullptr);
  return {xy_u + xz_u, xy_v + yz_u, xz_v + yz_v};
}

/// Geometry feature of p: G(x,y) + G(x,z) + G(y,z).
template <typename Scalar>
VectorX<Scalar> query_geometry(const GeometryTriplane<Scalar>& g, const Vector3<Scalar>& p) {
  VectorX<Scalar> out = VectorX<Scalar>::Zero(g.channels());
  accumulate_query(g, triplane_stencil(g, p), out);
  return out;
}

/// Texture feature without the symmetric aggregation (same sum as geometry).
template <typename Scalar>
VectorX<Scalar> query_texture_plain(const TextureTriplane<Scalar>& t, const Vector3<Scalar>& p) {
  VectorX<Scalar> out = VectorX<Scalar>::Zero(t.channels());
  accumulate_query(t, triplane_stencil(t, p), out);
  return out;
}

/// Symmetric texture feature:
///   T(x,y) + (T(x,z) + T(x,-z))/2 + (T(y,z) + T(y,-z))/2.
/// Summation order matches query_texture_plain so that z = 0 reproduces it
/// bit for bit, and swapping z for -z only commutes the pair sums.
template <typename Scalar>
VectorX<Scalar> query_texture_symmetric(const TextureTriplane<Scalar>& t, const Vector3<Scalar>& p) {
  const Scalar half(0.5);
  VectorX<Scalar> out = bilinear_sample(t.xy, p.x(), p.y());
  out += half * (bilinear_sample(t.xz, p.x(), p.z()) + bilinear_sample(t.xz, p.x(), Scalar(-p.z())));
  out += half * (bilinear_sample(t.yz, p.y(), p.z()) + bilinear_sample(t.yz, p.y(), Scalar(-p.z())));
  return out;
}

/// Backward of query_texture_symmetric: accumulates into `grad`, returns d/dp.
template <typename Scalar, typename Upstream>
Vector3<Scalar> query_texture_symmetric_backward(const TextureTriplane<Scalar>& t,
                                                 const Vector3<Scalar>& p, const Upstream& upstream,
                                                 TextureTriplane<std::type_identity_t<Scalar>>* grad) {
  const Scalar half(0.5);
  const VectorX<Scalar> up = upstream;
  const VectorX<Scalar> up_half = half * up;
  Vector3<Scalar> dp = Vector3<Scalar>::Zero();

  auto [u0, v0] = accumulate_sample_backward(t.xy, bilinear_stencil(t.xy, p.x(), p.y()), up,
                                             grad ? &grad->xy : nullptr);
  dp.x() += u0;
  dp.y() += v0;

  auto [u1, v1] = accumulate_sample_backward(t.xz, bilinear_stencil(t.xz, p.x(), p.z()), up_half,
                                             grad ? &grad->xz : nullptr);
  auto [u2, v2] = accumulate_sample_backward(t.xz, bilinear_stencil(t.xz, p.x(), Scalar(-p.z())),
                                             up_half, grad ? &grad->xz : nullptr);
  dp.x() += u1 + u2;
  dp.z() += v1 - v2;

  auto [u3, v3] = accumulate_sample_backward(t.yz, bilinear_stencil(t.yz, p.y(), p.z()), up_half,
                                             grad ? &grad->yz : nullptr);
  auto [u4, v4] = accumulate_sample_backward(t.yz, bilinear_stencil(t.yz, p.y(), Scalar(-p.z())),
                                             up_half, grad ? &grad->yz : nullptr);
  dp.y() += u3 + u4;
  dp.z() += v3 - v4;
  return dp;
}

template <typename Scalar, typename Tag, typename Upstream>
Vector3<Scalar> query_backward(const Triplane<Scalar, Tag>& t, const Vector3<Scalar>& p,
                               const Upstream& upstream, Triplane<std::type_identity_t<Scalar>, Tag>* grad) {
  return accumulate_query_backward(t, triplane_stencil(t, p), upstream, grad);
}

}  // namespace sym3d
