#pragma once

#include <random>
#include <vector>

#include "sym3d/common.hpp"

namespace sym3d {

enum class HeadKind : std::uint8_t {
  SdfDeform = 0,  // 1 sdf channel (identity) + 3 deform channels (tanh)
  Color = 1,      // 3 channels, sigmoid
};

inline Index head_width(HeadKind h) { return h == HeadKind::SdfDeform ? 4 : 3; }

/// C -> H -> H -> K perceptron with softplus hidden activations.
template <typename Scalar>
struct MlpDecoder {
  HeadKind head = HeadKind::SdfDeform;
  MatrixX<Scalar> w1, w2, w3;
  VectorX<Scalar> b1, b2, b3;

  Index input_width() const { return w1.cols(); }
  Index hidden_width() const { return w1.rows(); }
  Index output_width() const { return w3.rows(); }

  static MlpDecoder zeros(HeadKind head, Index input, Index hidden) {
    if (input < 1 || hidden < 1) throw InvalidInput("MlpDecoder: widths must be positive");
    const Index k = head_width(head);
    MlpDecoder d;
    d.head = head;
    d.w1 = MatrixX<Scalar>::Zero(hidden, input);
    d.w2 = MatrixX<Scalar>::Zero(hidden, hidden);
    d.w3 = MatrixX<Scalar>::Zero(k, hidden);
    d.b1 = VectorX<Scalar>::Zero(hidden);
    d.b2 = VectorX<Scalar>::Zero(hidden);
    d.b3 = VectorX<Scalar>::Zero(k);
    return d;
  }

  /// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] weights and biases. For the
  /// sdf head the sdf bias starts at +0.3 and the deform rows start at zero.
  template <typename Rng>
  static MlpDecoder random(HeadKind head, Index input, Index hidden, Rng& rng) {
    MlpDecoder d = zeros(head, input, hidden);
    const auto fill = [&rng](auto& m, Index fan_in) {
      const Scalar bound = Scalar(1) / std::sqrt(Scalar(fan_in));
      std::uniform_real_distribution<Scalar> dist(-bound, bound);
      for (Index q = 0; q < m.size(); ++q) m.data()[q] = dist(rng);
    };
    fill(d.w1, input);
    fill(d.b1, input);
    fill(d.w2, hidden);
    fill(d.b2, hidden);
    fill(d.w3, hidden);
    fill(d.b3, hidden);
    if (head == HeadKind::SdfDeform) {
      d.b3[0] = Scalar(0.3);
      d.w3.bottomRows(3).setZero();
      d.b3.tail(3).setZero();
    }
    return d;
  }

  /// Views of every parameter array, in a fixed order (w1 b1 w2 b2 w3 b3).
  std::vector<Eigen::Map<VectorX<Scalar>>> parameter_blocks() {
    std::vector<Eigen::Map<VectorX<Scalar>>> blocks;
    blocks.emplace_back(w1.data(), w1.size());
    blocks.emplace_back(b1.data(), b1.size());
    blocks.emplace_back(w2.data(), w2.size());
    blocks.emplace_back(b2.data(), b2.size());
    blocks.emplace_back(w3.data(), w3.size());
    blocks.emplace_back(b3.data(), b3.size());
    return blocks;
  }

  Index parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
  }
};

namespace detail {

// Vectorized activations over whole batches; softplus' = sigmoid.
template <typename Scalar>
MatrixX<Scalar> softplus_batch(const MatrixX<Scalar>& z) {
  return (z.array().max(Scalar(0)) + (Scalar(1) + (-z.array().abs()).exp()).log()).matrix();
}

template <typename Scalar>
MatrixX<Scalar> sigmoid_batch(const MatrixX<Scalar>& z) {
  return (Scalar(1) + (-z.array()).exp()).inverse().matrix();
}

}  // namespace detail

/// Intermediate values of a batched forward pass; columns are samples.
template <typename Scalar>
struct DecoderCache {
  MatrixX<Scalar> z1, h1, z2, h2, raw, out;
};

/// Forward over a C x B batch of features. `cache.out` holds the activated
/// K x B outputs.
template <typename Scalar>
DecoderCache<Scalar> decode_batch(const MlpDecoder<Scalar>& dec, const MatrixX<Scalar>& features) {
  if (features.rows() != dec.input_width()) throw ShapeError("decode: feature length != C");
  DecoderCache<Scalar> c;
  c.z1 = (dec.w1 * features).colwise() + dec.b1;
  c.h1 = detail::softplus_batch(c.z1);
  c.z2 = (dec.w2 * c.h1).colwise() + dec.b2;
  c.h2 = detail::softplus_batch(c.z2);
  c.raw = (dec.w3 * c.h2).colwise() + dec.b3;
  c.out = c.raw;
  if (dec.head == HeadKind::SdfDeform) {
    c.out.bottomRows(3) = c.raw.bottomRows(3).array().tanh();
  } else {
    c.out = detail::sigmoid_batch(c.raw);
  }
  return c;
}

template <typename Scalar>
struct SdfDeform {
  Scalar sdf = 0;
  Vector3<Scalar> deform = Vector3<Scalar>::Zero();
};

template <typename Scalar>
SdfDeform<Scalar> decode_sdf_deform(const MlpDecoder<Scalar>& dec, const VectorX<Scalar>& feature) {
  if (dec.head != HeadKind::SdfDeform) throw InvalidInput("decode_sdf_deform: decoder has a color head");
  const auto c = decode_batch(dec, MatrixX<Scalar>(feature));
  return {c.out(0, 0), c.out.col(0).template tail<3>()};
}

template <typename Scalar>
Vector3<Scalar> decode_color(const MlpDecoder<Scalar>& dec, const VectorX<Scalar>& feature) {
  if (dec.head != HeadKind::Color) throw InvalidInput("decode_color: decoder has an sdf head");
  return decode_batch(dec, MatrixX<Scalar>(feature)).out.col(0);
}

template <typename Scalar>
struct DecoderGradients {
  MlpDecoder<Scalar> params;
  MatrixX<Scalar> features;  // C x B
};

/// Backward of <upstream, decode_batch(dec, features).out>.
template <typename Scalar>
DecoderGradients<Scalar> decoder_backward(const MlpDecoder<Scalar>& dec, const MatrixX<Scalar>& features,
                                          const DecoderCache<Scalar>& cache,
                                          const MatrixX<Scalar>& upstream) {
  if (upstream.rows() != dec.output_width() || upstream.cols() != features.cols()) {
    throw ShapeError("decoder_backward: upstream shape mismatch");
  }
  MatrixX<Scalar> draw = upstream;
  if (dec.head == HeadKind::SdfDeform) {
    draw.bottomRows(3).array() *= Scalar(1) - cache.out.bottomRows(3).array().square();
  } else {
    draw.array() *= cache.out.array() * (Scalar(1) - cache.out.array());
  }

  DecoderGradients<Scalar> g;
  g.params = MlpDecoder<Scalar>::zeros(dec.head, dec.input_width(), dec.hidden_width());
  g.params.w3.noalias() = draw * cache.h2.transpose();
  g.params.b3 = draw.rowwise().sum();
  MatrixX<Scalar> dz2 = (dec.w3.transpose() * draw).cwiseProduct(detail::sigmoid_batch(cache.z2));
  g.params.w2.noalias() = dz2 * cache.h1.transpose();
  g.params.b2 = dz2.rowwise().sum();
  MatrixX<Scalar> dz1 = (dec.w2.transpose() * dz2).cwiseProduct(detail::sigmoid_batch(cache.z1));
  g.params.w1.noalias() = dz1 * features.transpose();
  g.params.b1 = dz1.rowwise().sum();
  g.features.noalias() = dec.w1.transpose() * dz1;
  return g;
}

}  // namespace sym3d
