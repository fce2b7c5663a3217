#include "wander/nn/adam.hpp"

#include <cmath>

#include "wander/nn/kernels.hpp"

namespace wander::nn {

void AdamConfig::check() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
}

template <typename T>
void adam_step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
               AdamState<T>& state) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter and gradient lists differ in length");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i]->shape() != grads[i]->shape())
      throw ShapeError("adam_step: gradient " + std::to_string(i) + " has shape " + shape_string(grads[i]->shape()) +
                       ", parameter has " + shape_string(params[i]->shape()));

  if (state.first_moment.empty()) {
    for (const Tensor<T>* p : params) {
      state.first_moment.emplace_back(p->shape());
      state.second_moment.emplace_back(p->shape());
    }
  } else {
    if (state.first_moment.size() != params.size()) throw ShapeError("adam_step: optimizer state has other layout");
    for (std::size_t i = 0; i < params.size(); ++i)
      if (state.first_moment[i].shape() != params[i]->shape())
        throw ShapeError("adam_step: optimizer state shape mismatch at parameter " + std::to_string(i));
  }

  state.t += 1;
  const auto t = static_cast<double>(state.t);
  const AdamConfig& c = state.config;
  const AdamCoefficients coeff{c.learning_rate,
                               c.beta1,
                               c.beta2,
                               c.epsilon,
                               1.0 / (1.0 - std::pow(c.beta1, t)),
                               1.0 / (1.0 - std::pow(c.beta2, t))};
  for (std::size_t i = 0; i < params.size(); ++i)
    omp::adam_update<T>(params[i]->values(), grads[i]->values(), state.first_moment[i].values(),
                        state.second_moment[i].values(), coeff);
}

template <typename T>
void adam_step(Parameters<T>& params, const Parameters<T>& grads, AdamState<T>& state) {
  const auto p = params.list();
  const auto g = grads.list();
  adam_step<T>(std::vector<Tensor<T>*>(p.begin(), p.end()), std::vector<const Tensor<T>*>(g.begin(), g.end()), state);
}

template void adam_step<float>(const std::vector<Tensor<float>*>&, const std::vector<const Tensor<float>*>&,
                               AdamState<float>&);
template void adam_step<double>(const std::vector<Tensor<double>*>&, const std::vector<const Tensor<double>*>&,
                                AdamState<double>&);
template void adam_step<float>(Parameters<float>&, const Parameters<float>&, AdamState<float>&);
template void adam_step<double>(Parameters<double>&, const Parameters<double>&, AdamState<double>&);

}  // namespace wander::nn
