#pragma once

// Tensor-level layer operations with shape checking. Each forward op has a
// matching backward that maps output gradients to input and parameter
// gradients; all of them run on the OpenMP kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "wander/nn/kernels.hpp"
#include "wander/nn/tensor.hpp"
#include "wander/rng.hpp"

namespace wander::nn {

enum class Mode { Train, Eval };

namespace detail {

inline void expect_rank(const Shape& s, std::size_t rank, const char* what) {
  if (s.size() != rank)
    throw ShapeError(std::string(what) + " must have rank " + std::to_string(rank) + ", got " + shape_string(s));
}

}  // namespace detail

// input [B,H,W,1], filters [KH,KW,F], bias [F] -> [B,H-KH+1,W-KW+1,F]
template <typename T>
ConvDims conv_dims(const Tensor<T>& input, const Tensor<T>& filters) {
  detail::expect_rank(input.shape(), 4, "conv2d input");
  detail::expect_rank(filters.shape(), 3, "conv2d filters");
  if (input.dim(3) != 1) throw ShapeError("conv2d expects a single input channel, got " + shape_string(input.shape()));
  ConvDims d{input.dim(0), input.dim(1), input.dim(2), filters.dim(0), filters.dim(1), filters.dim(2)};
  if (d.height < d.kernel_h || d.width < d.kernel_w)
    throw ShapeError("conv2d input " + shape_string(input.shape()) + " smaller than kernel " +
                     shape_string(filters.shape()));
  return d;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& filters, const Tensor<T>& bias) {
  const ConvDims d = conv_dims(input, filters);
  if (bias.shape() != Shape{d.filters}) throw ShapeError("conv2d bias must be [" + std::to_string(d.filters) + "]");
  Tensor<T> out({d.batch, d.out_h(), d.out_w(), d.filters});
  omp::conv2d_forward<T>(d, input.values(), filters.values(), bias.values(), out.values());
  return out;
}

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> filters;
  Tensor<T> bias;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& filters, const Tensor<T>& grad_output) {
  const ConvDims d = conv_dims(input, filters);
  if (grad_output.shape() != Shape{d.batch, d.out_h(), d.out_w(), d.filters})
    throw ShapeError("conv2d grad_output has shape " + shape_string(grad_output.shape()));
  ConvGrads<T> g{Tensor<T>(input.shape()), Tensor<T>(filters.shape()), Tensor<T>({d.filters})};
  omp::conv2d_backward<T>(d, input.values(), filters.values(), grad_output.values(), g.input.values(),
                          g.filters.values(), g.bias.values());
  return g;
}

template <typename T>
struct PoolResult {
  Tensor<T> output;
  std::vector<std::uint8_t> argmax;
};

// [B,H,W,C] -> [B,H/2,W/2,C]
template <typename T>
PoolResult<T> maxpool2x2(const Tensor<T>& input) {
  detail::expect_rank(input.shape(), 4, "maxpool input");
  const PoolDims d{input.dim(0), input.dim(1), input.dim(2), input.dim(3)};
  if (d.out_h() == 0 || d.out_w() == 0) throw ShapeError("maxpool input " + shape_string(input.shape()) + " too small");
  PoolResult<T> r{Tensor<T>({d.batch, d.out_h(), d.out_w(), d.channels}), std::vector<std::uint8_t>(d.output_size())};
  omp::maxpool2x2_forward<T>(d, input.values(), r.output.values(), r.argmax);
  return r;
}

template <typename T>
Tensor<T> maxpool2x2_backward(const Shape& input_shape, const std::vector<std::uint8_t>& argmax,
                              const Tensor<T>& grad_output) {
  detail::expect_rank(input_shape, 4, "maxpool input");
  const PoolDims d{input_shape[0], input_shape[1], input_shape[2], input_shape[3]};
  if (grad_output.shape() != Shape{d.batch, d.out_h(), d.out_w(), d.channels} || argmax.size() != d.output_size())
    throw ShapeError("maxpool grad_output has shape " + shape_string(grad_output.shape()));
  Tensor<T> grad(input_shape);
  omp::maxpool2x2_backward<T>(d, grad_output.values(), argmax, grad.values());
  return grad;
}

// x [B,N], weights [N,M], bias [M] -> [B,M]
template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias) {
  detail::expect_rank(x.shape(), 2, "dense input");
  detail::expect_rank(weights.shape(), 2, "dense weights");
  if (x.dim(1) != weights.dim(0) || bias.shape() != Shape{weights.dim(1)})
    throw ShapeError("dense shapes disagree: x " + shape_string(x.shape()) + ", W " + shape_string(weights.shape()) +
                     ", b " + shape_string(bias.shape()));
  const DenseDims d{x.dim(0), x.dim(1), weights.dim(1)};
  Tensor<T> out({d.batch, d.outputs});
  omp::dense_forward<T>(d, x.values(), weights.values(), bias.values(), out.values());
  return out;
}

template <typename T>
struct DenseGrads {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& grad_output) {
  detail::expect_rank(x.shape(), 2, "dense input");
  detail::expect_rank(weights.shape(), 2, "dense weights");
  if (x.dim(1) != weights.dim(0) || grad_output.shape() != Shape{x.dim(0), weights.dim(1)})
    throw ShapeError("dense backward shapes disagree");
  const DenseDims d{x.dim(0), x.dim(1), weights.dim(1)};
  DenseGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(weights.shape()), Tensor<T>({d.outputs})};
  omp::dense_backward<T>(d, x.values(), weights.values(), grad_output.values(), g.input.values(), g.weights.values(),
                         g.bias.values());
  return g;
}

template <typename T>
T relu(T x) {
  return x > T(0) ? x : T(0);
}

template <typename T>
T sigmoid(T x) {
  return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

template <typename T>
Tensor<T> relu(Tensor<T> x) {
  for (T& v : x.values()) v = relu(v);
  return x;
}

// relu'(0) = 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, Tensor<T> grad_output) {
  if (input.shape() != grad_output.shape()) throw ShapeError("relu backward shapes disagree");
  for (std::size_t i = 0; i < input.size(); ++i)
    if (!(input[i] > T(0))) grad_output[i] = T(0);
  return grad_output;
}

template <typename T>
Tensor<T> sigmoid(Tensor<T> x) {
  for (T& v : x.values()) v = sigmoid(v);
  return x;
}

// Takes the sigmoid output y; dy/dx = y(1-y).
template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& output, Tensor<T> grad_output) {
  if (output.shape() != grad_output.shape()) throw ShapeError("sigmoid backward shapes disagree");
  for (std::size_t i = 0; i < output.size(); ++i) grad_output[i] *= output[i] * (T(1) - output[i]);
  return grad_output;
}

// Inverted dropout. `scale` holds 0 for dropped units and 1/(1-p) for kept
// ones (all ones in eval mode); it doubles as the backward multiplier.
template <typename T>
struct DropoutResult {
  Tensor<T> output;
  Tensor<T> scale;
};

template <typename T>
DropoutResult<T> dropout(const Tensor<T>& x, double p, Mode mode, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ShapeError("dropout probability must lie in [0, 1)");
  DropoutResult<T> r{x, Tensor<T>(x.shape(), T(1))};
  if (mode == Mode::Eval || p == 0.0) return r;
  const T keep_scale = T(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.scale[i] = rng.uniform() < p ? T(0) : keep_scale;
    r.output[i] = x[i] * r.scale[i];
  }
  return r;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& scale, Tensor<T> grad_output) {
  if (scale.shape() != grad_output.shape()) throw ShapeError("dropout backward shapes disagree");
  for (std::size_t i = 0; i < scale.size(); ++i) grad_output[i] *= scale[i];
  return grad_output;
}

inline constexpr double kBceEpsilon = 1e-7;

template <typename T>
struct LossResult {
  T loss;
  Tensor<T> grad;  // d loss / d prediction
};

// Mean binary cross-entropy with predictions clamped to [eps, 1-eps]. The
// gradient is zero where the clamp is active.
template <typename T>
LossResult<T> bce_loss(const Tensor<T>& prediction, const Tensor<T>& target) {
  if (prediction.shape() != target.shape()) throw ShapeError("bce_loss shapes disagree");
  const double n = static_cast<double>(prediction.size());
  double total = 0.0;
  LossResult<T> r{T(0), Tensor<T>(prediction.shape())};
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double raw = prediction[i];
    const double p = std::clamp(raw, kBceEpsilon, 1.0 - kBceEpsilon);
    const double y = target[i];
    total += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    const bool clamped = raw < kBceEpsilon || raw > 1.0 - kBceEpsilon;
    r.grad[i] = clamped ? T(0) : T((-y / p + (1.0 - y) / (1.0 - p)) / n);
  }
  r.loss = T(total / n);
  return r;
}

}  // namespace wander::nn
