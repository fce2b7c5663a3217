#include <cmath>
#include <vector>

#include "kernel_instantiate.hpp"

namespace wander::nn::serial {

template <typename T>
void conv2d_forward(const ConvDims& d, std::span<const T> input, std::span<const T> filters, std::span<const T> bias,
                    std::span<T> output) {
  const std::size_t oh = d.out_h(), ow = d.out_w(), nf = d.filters;
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x)
        for (std::size_t f = 0; f < nf; ++f) {
          T acc = T(0);
          for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
            for (std::size_t kx = 0; kx < d.kernel_w; ++kx)
              acc += input[(b * d.height + y + ky) * d.width + x + kx] * filters[(ky * d.kernel_w + kx) * nf + f];
          output[((b * oh + y) * ow + x) * nf + f] = acc + bias[f];
        }
}

template <typename T>
void conv2d_backward(const ConvDims& d, std::span<const T> input, std::span<const T> filters,
                     std::span<const T> grad_output, std::span<T> grad_input, std::span<T> grad_filters,
                     std::span<T> grad_bias) {
  const std::size_t oh = d.out_h(), ow = d.out_w(), nf = d.filters;
  for (auto& v : grad_filters) v = T(0);
  for (auto& v : grad_bias) v = T(0);
  std::vector<T> partial_w(grad_filters.size());
  std::vector<T> partial_b(nf);

  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
      for (std::size_t kx = 0; kx < d.kernel_w; ++kx)
        for (std::size_t f = 0; f < nf; ++f) {
          T acc = T(0);
          for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
              acc += input[(b * d.height + y + ky) * d.width + x + kx] * grad_output[((b * oh + y) * ow + x) * nf + f];
          partial_w[(ky * d.kernel_w + kx) * nf + f] = acc;
        }
    for (std::size_t f = 0; f < nf; ++f) {
      T acc = T(0);
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) acc += grad_output[((b * oh + y) * ow + x) * nf + f];
      partial_b[f] = acc;
    }
    for (std::size_t i = 0; i < partial_w.size(); ++i) grad_filters[i] += partial_w[i];
    for (std::size_t f = 0; f < nf; ++f) grad_bias[f] += partial_b[f];
  }

  if (grad_input.empty()) return;
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t iy = 0; iy < d.height; ++iy)
      for (std::size_t ix = 0; ix < d.width; ++ix) {
        T acc = T(0);
        for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
          for (std::size_t kx = 0; kx < d.kernel_w; ++kx) {
            if (iy < ky || ix < kx || iy - ky >= oh || ix - kx >= ow) continue;
            const std::size_t y = iy - ky, x = ix - kx;
            for (std::size_t f = 0; f < nf; ++f)
              acc += filters[(ky * d.kernel_w + kx) * nf + f] * grad_output[((b * oh + y) * ow + x) * nf + f];
          }
        grad_input[(b * d.height + iy) * d.width + ix] = acc;
      }
}

template <typename T>
void maxpool2x2_forward(const PoolDims& d, std::span<const T> input, std::span<T> output,
                        std::span<std::uint8_t> argmax) {
  const std::size_t oh = d.out_h(), ow = d.out_w(), nc = d.channels;
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t py = 0; py < oh; ++py)
      for (std::size_t px = 0; px < ow; ++px)
        for (std::size_t c = 0; c < nc; ++c) {
          T best = T(0);
          std::uint8_t code = 0;
          for (std::uint8_t k = 0; k < 4; ++k) {
            const std::size_t y = 2 * py + k / 2, x = 2 * px + k % 2;
            const T v = input[((b * d.height + y) * d.width + x) * nc + c];
            if (k == 0 || v > best) {
              best = v;
              code = k;
            }
          }
          const std::size_t o = ((b * oh + py) * ow + px) * nc + c;
          output[o] = best;
          argmax[o] = code;
        }
}

template <typename T>
void maxpool2x2_backward(const PoolDims& d, std::span<const T> grad_output, std::span<const std::uint8_t> argmax,
                         std::span<T> grad_input) {
  const std::size_t oh = d.out_h(), ow = d.out_w(), nc = d.channels;
  for (auto& v : grad_input) v = T(0);
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t py = 0; py < oh; ++py)
      for (std::size_t px = 0; px < ow; ++px)
        for (std::size_t c = 0; c < nc; ++c) {
          const std::size_t o = ((b * oh + py) * ow + px) * nc + c;
          const std::size_t y = 2 * py + argmax[o] / 2, x = 2 * px + argmax[o] % 2;
          grad_input[((b * d.height + y) * d.width + x) * nc + c] = grad_output[o];
        }
}

template <typename T>
void dense_forward(const DenseDims& d, std::span<const T> x, std::span<const T> weights, std::span<const T> bias,
                   std::span<T> output) {
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t j = 0; j < d.outputs; ++j) {
      T acc = T(0);
      for (std::size_t i = 0; i < d.inputs; ++i) acc += x[b * d.inputs + i] * weights[i * d.outputs + j];
      output[b * d.outputs + j] = acc + bias[j];
    }
}

template <typename T>
void dense_backward(const DenseDims& d, std::span<const T> x, std::span<const T> weights,
                    std::span<const T> grad_output, std::span<T> grad_x, std::span<T> grad_weights,
                    std::span<T> grad_bias) {
  for (std::size_t i = 0; i < d.inputs; ++i)
    for (std::size_t j = 0; j < d.outputs; ++j) {
      T acc = T(0);
      for (std::size_t b = 0; b < d.batch; ++b) acc += x[b * d.inputs + i] * grad_output[b * d.outputs + j];
      grad_weights[i * d.outputs + j] = acc;
    }
  for (std::size_t j = 0; j < d.outputs; ++j) {
    T acc = T(0);
    for (std::size_t b = 0; b < d.batch; ++b) acc += grad_output[b * d.outputs + j];
    grad_bias[j] = acc;
  }
  if (grad_x.empty()) return;
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t i = 0; i < d.inputs; ++i) {
      T acc = T(0);
      for (std::size_t j = 0; j < d.outputs; ++j) acc += grad_output[b * d.outputs + j] * weights[i * d.outputs + j];
      grad_x[b * d.inputs + i] = acc;
    }
}

template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> first_moment, std::span<T> second_moment,
                 const AdamCoefficients& c) {
  const T b1 = T(c.beta1), b2 = T(c.beta2), a1 = T(1.0 - c.beta1), a2 = T(1.0 - c.beta2);
  const T lr = T(c.learning_rate), eps = T(c.epsilon), k1 = T(c.inv_bias1), k2 = T(c.inv_bias2);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    first_moment[i] = b1 * first_moment[i] + a1 * g;
    second_moment[i] = b2 * second_moment[i] + a2 * (g * g);
    const T m_hat = first_moment[i] * k1;
    const T v_hat = second_moment[i] * k2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

WANDER_INSTANTIATE(float)
WANDER_INSTANTIATE(double)

}  // namespace wander::nn::serial
