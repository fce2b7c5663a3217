#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "kernel_instantiate.hpp"

namespace wander::nn::omp {

namespace {
// Rows of a dense weight matrix processed per cache block.
constexpr std::size_t kDenseRowBlock = 512;
constexpr std::size_t kGradRowBlock = 64;
// Width of the register-resident accumulator tiles in the dense kernels.
constexpr std::size_t kTile = 64;
}  // namespace

template <typename T>
void conv2d_forward(const ConvDims& d, std::span<const T> input, std::span<const T> filters, std::span<const T> bias,
                    std::span<T> output) {
  const std::size_t oh = d.out_h(), ow = d.out_w(), nf = d.filters;
  const T* in = input.data();
  const T* w = filters.data();
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        T* __restrict o = output.data() + ((b * oh + y) * ow + x) * nf;
        std::fill(o, o + nf, T(0));
        for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
          for (std::size_t kx = 0; kx < d.kernel_w; ++kx) {
            const T v = in[(b * d.height + y + ky) * d.width + x + kx];
            if (v == T(0)) continue;
            const T* __restrict wr = w + (ky * d.kernel_w + kx) * nf;
            for (std::size_t f = 0; f < nf; ++f) o[f] += v * wr[f];
          }
        for (std::size_t f = 0; f < nf; ++f) o[f] += bias[f];
      }
}

template <typename T>
void conv2d_backward(const ConvDims& d, std::span<const T> input, std::span<const T> filters,
                     std::span<const T> grad_output, std::span<T> grad_input, std::span<T> grad_filters,
                     std::span<T> grad_bias) {
  const std::size_t oh = d.out_h(), ow = d.out_w(), nf = d.filters;
  const std::size_t taps = d.kernel_h * d.kernel_w;
  const std::size_t stride = taps * nf + nf;  // per-sample partial: filters then bias
  std::vector<T> partials(d.batch * stride, T(0));
  const T* in = input.data();
  const T* g_all = grad_output.data();

#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < d.batch; ++b) {
    T* __restrict pw = partials.data() + b * stride;
    T* __restrict pb = pw + taps * nf;
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        const T* __restrict g = g_all + ((b * oh + y) * ow + x) * nf;
        for (std::size_t f = 0; f < nf; ++f) pb[f] += g[f];
        for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
          for (std::size_t kx = 0; kx < d.kernel_w; ++kx) {
            const T v = in[(b * d.height + y + ky) * d.width + x + kx];
            if (v == T(0)) continue;
            T* __restrict p = pw + (ky * d.kernel_w + kx) * nf;
            for (std::size_t f = 0; f < nf; ++f) p[f] += v * g[f];
          }
      }
  }

  std::fill(grad_filters.begin(), grad_filters.end(), T(0));
  std::fill(grad_bias.begin(), grad_bias.end(), T(0));
  for (std::size_t b = 0; b < d.batch; ++b) {
    const T* pw = partials.data() + b * stride;
    for (std::size_t i = 0; i < taps * nf; ++i) grad_filters[i] += pw[i];
    for (std::size_t f = 0; f < nf; ++f) grad_bias[f] += pw[taps * nf + f];
  }

  if (grad_input.empty()) return;
  const T* w = filters.data();
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t iy = 0; iy < d.height; ++iy)
      for (std::size_t ix = 0; ix < d.width; ++ix) {
        T acc = T(0);
        for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
          for (std::size_t kx = 0; kx < d.kernel_w; ++kx) {
            if (iy < ky || ix < kx || iy - ky >= oh || ix - kx >= ow) continue;
            const T* wr = w + (ky * d.kernel_w + kx) * nf;
            const T* g = g_all + ((b * oh + iy - ky) * ow + ix - kx) * nf;
            for (std::size_t f = 0; f < nf; ++f) acc += wr[f] * g[f];
          }
        grad_input[(b * d.height + iy) * d.width + ix] = acc;
      }
}

template <typename T>
void maxpool2x2_forward(const PoolDims& d, std::span<const T> input, std::span<T> output,
                        std::span<std::uint8_t> argmax) {
  const std::size_t oh = d.out_h(), ow = d.out_w(), nc = d.channels;
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t py = 0; py < oh; ++py)
      for (std::size_t px = 0; px < ow; ++px) {
        const T* r0 = input.data() + ((b * d.height + 2 * py) * d.width + 2 * px) * nc;
        const T* r1 = r0 + d.width * nc;
        T* o = output.data() + ((b * oh + py) * ow + px) * nc;
        std::uint8_t* a = argmax.data() + ((b * oh + py) * ow + px) * nc;
        for (std::size_t c = 0; c < nc; ++c) {
          T best = r0[c];
          std::uint8_t code = 0;
          if (r0[nc + c] > best) best = r0[nc + c], code = 1;
          if (r1[c] > best) best = r1[c], code = 2;
          if (r1[nc + c] > best) best = r1[nc + c], code = 3;
          o[c] = best;
          a[c] = code;
        }
      }
}

template <typename T>
void maxpool2x2_backward(const PoolDims& d, std::span<const T> grad_output, std::span<const std::uint8_t> argmax,
                         std::span<T> grad_input) {
  const std::size_t oh = d.out_h(), ow = d.out_w(), nc = d.channels;
  std::fill(grad_input.begin(), grad_input.end(), T(0));
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t py = 0; py < oh; ++py)
      for (std::size_t px = 0; px < ow; ++px)
        for (std::size_t c = 0; c < nc; ++c) {
          const std::size_t o = ((b * oh + py) * ow + px) * nc + c;
          const std::size_t y = 2 * py + argmax[o] / 2, x = 2 * px + argmax[o] % 2;
          grad_input[((b * d.height + y) * d.width + x) * nc + c] = grad_output[o];
        }
}

// Fixed-width accumulator tiles built from GCC vector types so that the
// whole tile stays in registers across a reduction. Lane j of a tile only
// ever sees `acc[j] += v * row[j]`, the same operation sequence as the
// scalar reference.
template <typename T>
struct Vec;
template <>
struct Vec<float> {
  typedef float type __attribute__((vector_size(64)));
};
template <>
struct Vec<double> {
  typedef double type __attribute__((vector_size(64)));
};

template <typename T>
struct Tile {
  using V = typename Vec<T>::type;
  static constexpr std::size_t kLanes = sizeof(V) / sizeof(T);
  static constexpr std::size_t kVecs = kTile / kLanes;
  V v[kVecs];

  void load(const T* p) {
#pragma GCC unroll 16
    for (std::size_t k = 0; k < kVecs; ++k) __builtin_memcpy(&v[k], p + k * kLanes, sizeof(V));
  }
  void store(T* p) const {
#pragma GCC unroll 16
    for (std::size_t k = 0; k < kVecs; ++k) __builtin_memcpy(p + k * kLanes, &v[k], sizeof(V));
  }
  void zero() {
#pragma GCC unroll 16
    for (std::size_t k = 0; k < kVecs; ++k) v[k] = V{};
  }
  void axpy(T s, const T* row) {
    const V sv = V{} + s;
#pragma GCC unroll 16
    for (std::size_t k = 0; k < kVecs; ++k) {
      V r;
      __builtin_memcpy(&r, row + k * kLanes, sizeof(V));
      v[k] += sv * r;
    }
  }
  static void axpy2(Tile& a, Tile& b, T sa, T sb, const T* row) {
    const V va = V{} + sa, vb = V{} + sb;
#pragma GCC unroll 16
    for (std::size_t k = 0; k < kVecs; ++k) {
      V r;
      __builtin_memcpy(&r, row + k * kLanes, sizeof(V));
      a.v[k] += va * r;
      b.v[k] += vb * r;
    }
  }
};

template <typename T>
inline void axpy_tail(T* __restrict acc, T v, const T* __restrict row, std::size_t width) {
  for (std::size_t j = 0; j < width; ++j) acc[j] += v * row[j];
}

// Indices in [begin, end) whose entry (at base[index * stride]) is nonzero,
// gathered without data-dependent branches.
template <typename T>
std::size_t nonzero_indices(const T* base, std::size_t stride, std::size_t begin, std::size_t end,
                            std::uint32_t* out) {
  std::size_t count = 0;
  for (std::size_t i = begin; i < end; ++i) {
    out[count] = static_cast<std::uint32_t>(i);
    count += base[i * stride] != T(0) ? 1 : 0;
  }
  return count;
}

// Two independent rows advance together so that their accumulator chains
// interleave; each row still consumes its own terms in ascending order.
template <typename T>
void accumulate_pair(Tile<T>& a0, Tile<T>& a1, const std::uint32_t* l0, std::size_t c0, const std::uint32_t* l1,
                     std::size_t c1, const T* s0, const T* s1, std::size_t s_stride, const T* rows,
                     std::size_t row_stride) {
  const std::size_t both = std::min(c0, c1);
  std::size_t k = 0;
  for (; k < both; ++k) {
    a0.axpy(s0[l0[k] * s_stride], rows + l0[k] * row_stride);
    a1.axpy(s1[l1[k] * s_stride], rows + l1[k] * row_stride);
  }
  for (std::size_t r = k; r < c0; ++r) a0.axpy(s0[l0[r] * s_stride], rows + l0[r] * row_stride);
  for (std::size_t r = k; r < c1; ++r) a1.axpy(s1[l1[r] * s_stride], rows + l1[r] * row_stride);
}

template <typename T>
void dense_forward(const DenseDims& d, std::span<const T> x, std::span<const T> weights, std::span<const T> bias,
                   std::span<T> output) {
  const std::size_t n = d.inputs, m = d.outputs;
  const std::size_t pairs = (d.batch + 1) / 2;
  std::fill(output.begin(), output.end(), T(0));
#pragma omp parallel
  {
    std::vector<std::uint32_t> live0(kDenseRowBlock), live1(kDenseRowBlock);
    for (std::size_t i0 = 0; i0 < n; i0 += kDenseRowBlock) {
      const std::size_t i1 = std::min(n, i0 + kDenseRowBlock);
#pragma omp for schedule(static)
      for (std::size_t p = 0; p < pairs; ++p) {
        const std::size_t b = 2 * p;
        const bool pair = b + 1 < d.batch;
        const T* x0 = x.data() + b * n;
        const T* x1 = pair ? x0 + n : x0;
        const std::size_t c0 = nonzero_indices(x0, 1, i0, i1, live0.data());
        const std::size_t c1 = pair ? nonzero_indices(x1, 1, i0, i1, live1.data()) : 0;
        for (std::size_t j0 = 0; j0 < m; j0 += kTile) {
          T* o0 = output.data() + b * m + j0;
          T* o1 = o0 + m;
          const T* w = weights.data() + j0;
          if (m - j0 >= kTile) {
            Tile<T> acc0, acc1;
            acc0.load(o0);
            if (pair) acc1.load(o1);
            else acc1.zero();
            accumulate_pair(acc0, acc1, live0.data(), c0, live1.data(), c1, x0, x1, 1, w, m);
            acc0.store(o0);
            if (pair) acc1.store(o1);
          } else {
            for (std::size_t k = 0; k < c0; ++k) axpy_tail(o0, x0[live0[k]], w + live0[k] * m, m - j0);
            for (std::size_t k = 0; k < c1; ++k) axpy_tail(o1, x1[live1[k]], w + live1[k] * m, m - j0);
          }
        }
      }
    }
  }
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t j = 0; j < m; ++j) output[b * m + j] += bias[j];
}

template <typename T>
void dense_backward(const DenseDims& d, std::span<const T> x, std::span<const T> weights,
                    std::span<const T> grad_output, std::span<T> grad_x, std::span<T> grad_weights,
                    std::span<T> grad_bias) {
  const std::size_t n = d.inputs, m = d.outputs, nb = d.batch;
  std::vector<T> g_t(m * nb);
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t j = 0; j < m; ++j) g_t[j * nb + b] = grad_output[b * m + j];

  const bool want_x = !grad_x.empty();
  const std::size_t blocks = (n + kGradRowBlock - 1) / kGradRowBlock;
#pragma omp parallel
  {
    std::vector<std::uint32_t> live0(nb), live1(nb);
#pragma omp for schedule(static)
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      const std::size_t i0 = blk * kGradRowBlock;
      const std::size_t i1 = std::min(n, i0 + kGradRowBlock);

      // grad_W[i, j] = sum over b of x[b, i] * g[b, j], rows i and i+1 together.
      for (std::size_t i = i0; i < i1; i += 2) {
        const bool pair = i + 1 < i1;
        const std::size_t c0 = nonzero_indices(x.data() + i, n, 0, nb, live0.data());
        const std::size_t c1 = pair ? nonzero_indices(x.data() + i + 1, n, 0, nb, live1.data()) : 0;
        for (std::size_t j0 = 0; j0 < m; j0 += kTile) {
          T* gw0 = grad_weights.data() + i * m + j0;
          T* gw1 = gw0 + m;
          const T* g = grad_output.data() + j0;
          if (m - j0 >= kTile) {
            Tile<T> acc0, acc1;
            acc0.zero();
            acc1.zero();
            accumulate_pair(acc0, acc1, live0.data(), c0, live1.data(), c1, x.data() + i, x.data() + i + 1, n, g, m);
            acc0.store(gw0);
            if (pair) acc1.store(gw1);
          } else {
            std::fill_n(gw0, m - j0, T(0));
            for (std::size_t k = 0; k < c0; ++k) axpy_tail(gw0, x[live0[k] * n + i], g + live0[k] * m, m - j0);
            if (pair) {
              std::fill_n(gw1, m - j0, T(0));
              for (std::size_t k = 0; k < c1; ++k)
                axpy_tail(gw1, x[live1[k] * n + i + 1], g + live1[k] * m, m - j0);
            }
          }
        }
      }

      // grad_x[b, i] = sum over j of g[b, j] * W[i, j]. Two rows of W
      // share each load of g and give the adds independent chains.
      if (!want_x) continue;
      for (std::size_t i = i0; i < i1; i += 2) {
        const bool pair = i + 1 < i1;
        const T* w0 = weights.data() + i * m;
        const T* w1 = pair ? w0 + m : w0;
        for (std::size_t b0 = 0; b0 < nb; b0 += kTile) {
          const T* g = g_t.data() + b0;
          const std::size_t width = std::min(kTile, nb - b0);
          alignas(64) T out0[kTile];
          alignas(64) T out1[kTile];
          if (width == kTile) {
            Tile<T> acc0, acc1;
            acc0.zero();
            acc1.zero();
            for (std::size_t j = 0; j < m; ++j) Tile<T>::axpy2(acc0, acc1, w0[j], w1[j], g + j * nb);
            acc0.store(out0);
            acc1.store(out1);
          } else {
            std::fill_n(out0, width, T(0));
            std::fill_n(out1, width, T(0));
            for (std::size_t j = 0; j < m; ++j) {
              axpy_tail(out0, w0[j], g + j * nb, width);
              axpy_tail(out1, w1[j], g + j * nb, width);
            }
          }
          for (std::size_t k = 0; k < width; ++k) grad_x[(b0 + k) * n + i] = out0[k];
          if (pair)
            for (std::size_t k = 0; k < width; ++k) grad_x[(b0 + k) * n + i + 1] = out1[k];
        }
      }
    }
  }

  for (std::size_t j = 0; j < m; ++j) {
    T s = T(0);
    for (std::size_t b = 0; b < nb; ++b) s += grad_output[b * m + j];
    grad_bias[j] = s;
  }
}

template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> first_moment, std::span<T> second_moment,
                 const AdamCoefficients& c) {
  const T b1 = T(c.beta1), b2 = T(c.beta2), a1 = T(1.0 - c.beta1), a2 = T(1.0 - c.beta2);
  const T lr = T(c.learning_rate), eps = T(c.epsilon), k1 = T(c.inv_bias1), k2 = T(c.inv_bias2);
  T* __restrict p = param.data();
  const T* __restrict g = grad.data();
  T* __restrict m = first_moment.data();
  T* __restrict v = second_moment.data();
  const std::size_t n = param.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const T gi = g[i];
    m[i] = b1 * m[i] + a1 * gi;
    v[i] = b2 * v[i] + a2 * (gi * gi);
    const T m_hat = m[i] * k1;
    const T v_hat = v[i] * k2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

WANDER_INSTANTIATE(float)
WANDER_INSTANTIATE(double)

}  // namespace wander::nn::omp
