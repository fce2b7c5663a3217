#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "wander/nn/layers.hpp"
#include "wander/nn/tensor.hpp"

namespace wander::nn {

inline constexpr int kConvFilters = 32;

// conv(3x3, 32 filters, valid) -> relu -> maxpool 2x2 -> flatten
//   -> fc1 -> relu -> dropout -> fc2 -> relu -> fc3 -> sigmoid
//
// With the defaults the shapes are 128x128x1 -> 126x126x32 -> 63x63x32
// -> 127008 -> 64 -> 32 -> 1, for 8,131,009 trainable parameters.
struct ModelConfig {
  int input_height = 128;
  int input_width = 128;
  int kernel_size = 3;
  int filters = kConvFilters;
  int fc1_units = 64;
  int fc2_units = 32;
  double dropout = 0.25;

  void check() const;  // throws ShapeError / ConfigError

  std::size_t conv_height() const { return static_cast<std::size_t>(input_height - kernel_size + 1); }
  std::size_t conv_width() const { return static_cast<std::size_t>(input_width - kernel_size + 1); }
  std::size_t pooled_height() const { return conv_height() / 2; }
  std::size_t pooled_width() const { return conv_width() / 2; }
  std::size_t flatten_dim() const { return pooled_height() * pooled_width() * static_cast<std::size_t>(filters); }
  std::size_t image_size() const { return static_cast<std::size_t>(input_height) * input_width; }
  std::size_t parameter_count() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <typename T>
struct Parameters {
  Tensor<T> conv_w;  // [k, k, filters]
  Tensor<T> conv_b;  // [filters]
  Tensor<T> fc1_w;   // [flatten_dim, fc1]
  Tensor<T> fc1_b;
  Tensor<T> fc2_w;  // [fc1, fc2]
  Tensor<T> fc2_b;
  Tensor<T> fc3_w;  // [fc2, 1]
  Tensor<T> fc3_b;

  static constexpr std::array<std::string_view, 8> kNames{"conv_w", "conv_b", "fc1_w", "fc1_b",
                                                          "fc2_w",  "fc2_b",  "fc3_w", "fc3_b"};

  std::array<Tensor<T>*, 8> list() { return {&conv_w, &conv_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b, &fc3_w, &fc3_b}; }
  std::array<const Tensor<T>*, 8> list() const {
    return {&conv_w, &conv_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b, &fc3_w, &fc3_b};
  }

  // Zero-filled parameters with the architecture's shapes.
  static Parameters zeros(const ModelConfig& cfg);

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

template <typename T>
class CnnModel {
 public:
  // Everything the backward pass needs from one forward pass.
  struct Activations {
    std::size_t batch = 0;
    std::vector<T> images;
    std::vector<T> pooled;  // [B, flatten_dim], post-relu
    std::vector<std::uint8_t> argmax;
    std::vector<T> fc1;         // post-relu, pre-dropout
    std::vector<T> drop_scale;  // 0 or 1/(1-p)
    std::vector<T> fc1_out;     // post-dropout
    std::vector<T> fc2;         // post-relu
    std::vector<T> predictions;  // sigmoid outputs, [B]
    std::vector<T> conv_scratch;  // one image's conv output, reused per image
  };

  // Gradient buffers reused across backward calls.
  struct BackwardScratch {
    std::vector<T> g_logit, g2, g1, g_pooled, g_conv, part_w, part_b;
  };

  // He-uniform for the relu layers, Glorot-uniform for fc3, zero biases.
  // Parameter k is drawn from derive_seed(init_seed, k).
  CnnModel(const ModelConfig& cfg, std::uint64_t init_seed);
  CnnModel(const ModelConfig& cfg, Parameters<T> params);

  const ModelConfig& config() const noexcept { return config_; }
  Parameters<T>& parameters() noexcept { return params_; }
  const Parameters<T>& parameters() const noexcept { return params_; }

  // images: batch * input_height * input_width unit-scale pixels. Train mode
  // samples the dropout mask from Rng(dropout_seed).
  Activations forward(std::span<const T> images, std::size_t batch, Mode mode, std::uint64_t dropout_seed = 0) const;
  // Same, reusing the buffers already held by `out`.
  void forward(std::span<const T> images, std::size_t batch, Mode mode, std::uint64_t dropout_seed,
               Activations& out) const;

  // Eval-mode probabilities, processed in chunks of 64 images.
  std::vector<T> predict(std::span<const T> images, std::size_t count) const;

  // Writes d(mean BCE)/d(parameter) into grads and returns the loss. The
  // sigmoid and the loss are differentiated together: d loss / d logit is
  // (p - y) / B.
  T backward(const Activations& acts, std::span<const T> targets, Parameters<T>& grads) const;
  T backward(const Activations& acts, std::span<const T> targets, Parameters<T>& grads,
             BackwardScratch& scratch) const;

 private:
  ModelConfig config_;
  Parameters<T> params_;
};

// Mean BCE with the [1e-7, 1 - 1e-7] clamp, accumulated in double.
template <typename T>
double mean_bce(std::span<const T> predictions, std::span<const T> targets);

extern template struct Parameters<float>;
extern template struct Parameters<double>;
extern template class CnnModel<float>;
extern template class CnnModel<double>;

}  // namespace wander::nn
