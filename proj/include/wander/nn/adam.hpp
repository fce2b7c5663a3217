#pragma once

#include <cstdint>
#include <vector>

#include "wander/nn/model.hpp"
#include "wander/nn/tensor.hpp"

namespace wander::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void check() const;
};

// Moment buffers mirror the parameter list they were created for.
template <typename T>
struct AdamState {
  AdamConfig config;
  std::uint64_t t = 0;
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;

  AdamState() = default;
  explicit AdamState(const AdamConfig& cfg) : config(cfg) {}
};

// Increments t, then applies the bias-corrected update to every parameter.
// The moment buffers are created on the first call; later calls must pass
// the same shapes in the same order.
template <typename T>
void adam_step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
               AdamState<T>& state);

template <typename T>
void adam_step(Parameters<T>& params, const Parameters<T>& grads, AdamState<T>& state);

}  // namespace wander::nn
