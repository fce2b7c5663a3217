#pragma once

// Raw compute kernels on row-major buffers.
//
// Every kernel exists twice: `serial` is the plain loop nest kept as the
// reference, `omp` is the blocked OpenMP version used by the model. Both
// evaluate each output element with the same summation order, so their
// results are bit-identical for any thread count:
//
//   conv2d_forward   out[b,y,x,f] = (sum over (ky,kx) row-major of in*w) + bias[f]
//   conv2d_backward  dW[k,f] = sum over b of (sum over (y,x) row-major of in*g)
//                    db[f]   = sum over b of (sum over (y,x) row-major of g)
//                    din[b,iy,ix] = sum over (ky,kx) row-major, then f, of w*g
//   dense_forward    out[b,j] = (sum over i of x[b,i]*W[i,j]) + bias[j]
//   dense_backward   dW[i,j] = sum over b of x[b,i]*g[b,j]
//                    db[j]   = sum over b of g[b,j]
//                    dx[b,i] = sum over j of g[b,j]*W[i,j]
//
// Sums start from +0 and run in ascending index order. The OpenMP kernels
// skip products whose data operand is exactly zero, which leaves finite sums
// unchanged.
//
// Layouts: conv input [B,H,W] (one channel), filters [KH,KW,F], conv output
// [B,OH,OW,F]; pool input [B,H,W,C]; dense x [B,N], W [N,M], out [B,M].

#include <cstddef>
#include <cstdint>
#include <span>

namespace wander::nn {

struct ConvDims {
  std::size_t batch = 1;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t filters = 1;

  std::size_t out_h() const { return height - kernel_h + 1; }
  std::size_t out_w() const { return width - kernel_w + 1; }
  std::size_t input_size() const { return batch * height * width; }
  std::size_t filter_size() const { return kernel_h * kernel_w * filters; }
  std::size_t output_size() const { return batch * out_h() * out_w() * filters; }
};

// Odd trailing rows/columns are dropped.
struct PoolDims {
  std::size_t batch = 1;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;

  std::size_t out_h() const { return height / 2; }
  std::size_t out_w() const { return width / 2; }
  std::size_t input_size() const { return batch * height * width * channels; }
  std::size_t output_size() const { return batch * out_h() * out_w() * channels; }
};

struct DenseDims {
  std::size_t batch = 1;
  std::size_t inputs = 0;
  std::size_t outputs = 0;
};

// Bias-corrected Adam coefficients for one step t:
//   m = beta1*m + (1-beta1)*g;  v = beta2*v + (1-beta2)*g*g
//   p -= lr * (m*inv_bias1) / (sqrt(v*inv_bias2) + epsilon)
// with inv_bias1 = 1/(1-beta1^t), inv_bias2 = 1/(1-beta2^t).
struct AdamCoefficients {
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  double inv_bias1;
  double inv_bias2;
};

// Argmax codes inside a 2x2 window: 0 (0,0), 1 (0,1), 2 (1,0), 3 (1,1);
// ties resolve to the lowest code.

#define WANDER_KERNEL_DECLS                                                                                   \
  template <typename T>                                                                                       \
  void conv2d_forward(const ConvDims& d, std::span<const T> input, std::span<const T> filters,                \
                      std::span<const T> bias, std::span<T> output);                                          \
  /* grad_input may be empty to skip it. */                                                                   \
  template <typename T>                                                                                       \
  void conv2d_backward(const ConvDims& d, std::span<const T> input, std::span<const T> filters,               \
                       std::span<const T> grad_output, std::span<T> grad_input, std::span<T> grad_filters,    \
                       std::span<T> grad_bias);                                                               \
  template <typename T>                                                                                       \
  void maxpool2x2_forward(const PoolDims& d, std::span<const T> input, std::span<T> output,                   \
                          std::span<std::uint8_t> argmax);                                                    \
  template <typename T>                                                                                       \
  void maxpool2x2_backward(const PoolDims& d, std::span<const T> grad_output,                                 \
                           std::span<const std::uint8_t> argmax, std::span<T> grad_input);                    \
  template <typename T>                                                                                       \
  void dense_forward(const DenseDims& d, std::span<const T> x, std::span<const T> weights,                    \
                     std::span<const T> bias, std::span<T> output);                                           \
  /* grad_x may be empty to skip it. */                                                                       \
  template <typename T>                                                                                       \
  void dense_backward(const DenseDims& d, std::span<const T> x, std::span<const T> weights,                   \
                      std::span<const T> grad_output, std::span<T> grad_x, std::span<T> grad_weights,         \
                      std::span<T> grad_bias);                                                                \
  template <typename T>                                                                                       \
  void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> first_moment,                    \
                   std::span<T> second_moment, const AdamCoefficients& c);

namespace serial {
WANDER_KERNEL_DECLS
}  // namespace serial

namespace omp {
WANDER_KERNEL_DECLS
}  // namespace omp

#undef WANDER_KERNEL_DECLS

}  // namespace wander::nn
