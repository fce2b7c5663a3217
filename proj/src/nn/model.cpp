#include "wander/nn/model.hpp"

#include <algorithm>
#include <cmath>

#include "wander/nn/kernels.hpp"
#include "wander/rng.hpp"

namespace wander::nn {

void ModelConfig::check() const {
  if (filters != kConvFilters) throw ConfigError("the convolution has exactly 32 filters");
  if (kernel_size < 1) throw ConfigError("kernel_size must be positive");
  if (input_height < kernel_size + 1 || input_width < kernel_size + 1)
    throw ShapeError("input smaller than the convolution kernel plus one pooling step");
  if (fc1_units < 1 || fc2_units < 1) throw ConfigError("fc widths must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

std::size_t ModelConfig::parameter_count() const {
  const auto k = static_cast<std::size_t>(kernel_size);
  const auto f = static_cast<std::size_t>(filters);
  const auto h1 = static_cast<std::size_t>(fc1_units);
  const auto h2 = static_cast<std::size_t>(fc2_units);
  return k * k * f + f + flatten_dim() * h1 + h1 + h1 * h2 + h2 + h2 + 1;
}

template <typename T>
Parameters<T> Parameters<T>::zeros(const ModelConfig& cfg) {
  const auto k = static_cast<std::size_t>(cfg.kernel_size);
  const auto f = static_cast<std::size_t>(cfg.filters);
  const auto h1 = static_cast<std::size_t>(cfg.fc1_units);
  const auto h2 = static_cast<std::size_t>(cfg.fc2_units);
  return Parameters{Tensor<T>({k, k, f}),  Tensor<T>({f}),  Tensor<T>({cfg.flatten_dim(), h1}), Tensor<T>({h1}),
                    Tensor<T>({h1, h2}), Tensor<T>({h2}), Tensor<T>({h2, 1}),                 Tensor<T>({1})};
}

template <typename T>
CnnModel<T>::CnnModel(const ModelConfig& cfg, std::uint64_t init_seed) : config_(cfg) {
  config_.check();
  params_ = Parameters<T>::zeros(config_);
  const auto k = static_cast<double>(cfg.kernel_size);
  const std::array<double, 4> limits{
      std::sqrt(6.0 / (k * k)),
      std::sqrt(6.0 / static_cast<double>(cfg.flatten_dim())),
      std::sqrt(6.0 / cfg.fc1_units),
      std::sqrt(6.0 / (cfg.fc2_units + 1.0)),
  };
  auto weights = params_.list();
  for (std::size_t layer = 0; layer < limits.size(); ++layer) {
    Rng rng(derive_seed(init_seed, 2 * layer));
    for (T& w : weights[2 * layer]->values()) w = static_cast<T>(rng.uniform(-limits[layer], limits[layer]));
  }
}

template <typename T>
CnnModel<T>::CnnModel(const ModelConfig& cfg, Parameters<T> params) : config_(cfg), params_(std::move(params)) {
  config_.check();
  const auto expected = Parameters<T>::zeros(config_);
  const auto have = params_.list();
  const auto want = expected.list();
  for (std::size_t i = 0; i < have.size(); ++i)
    if (have[i]->shape() != want[i]->shape())
      throw ShapeError(std::string(Parameters<T>::kNames[i]) + " has shape " + shape_string(have[i]->shape()) +
                       ", architecture expects " + shape_string(want[i]->shape()));
}

template <typename T>
typename CnnModel<T>::Activations CnnModel<T>::forward(std::span<const T> images, std::size_t batch, Mode mode,
                                                       std::uint64_t dropout_seed) const {
  Activations a;
  forward(images, batch, mode, dropout_seed, a);
  return a;
}

template <typename T>
void CnnModel<T>::forward(std::span<const T> images, std::size_t batch, Mode mode, std::uint64_t dropout_seed,
                          Activations& a) const {
  const ModelConfig& c = config_;
  const std::size_t pixels = c.image_size();
  if (batch == 0 || images.size() != batch * pixels)
    throw ShapeError("forward expects " + std::to_string(batch) + " images of " + std::to_string(c.input_height) +
                     "x" + std::to_string(c.input_width));
  const std::size_t flat = c.flatten_dim();
  const auto h1 = static_cast<std::size_t>(c.fc1_units);
  const auto h2 = static_cast<std::size_t>(c.fc2_units);

  a.batch = batch;
  a.images.assign(images.begin(), images.end());
  a.pooled.resize(batch * flat);
  a.argmax.resize(batch * flat);

  const ConvDims conv{1,
                      static_cast<std::size_t>(c.input_height),
                      static_cast<std::size_t>(c.input_width),
                      static_cast<std::size_t>(c.kernel_size),
                      static_cast<std::size_t>(c.kernel_size),
                      static_cast<std::size_t>(c.filters)};
  const PoolDims pool{1, c.conv_height(), c.conv_width(), conv.filters};
  auto& conv_out = a.conv_scratch;
  conv_out.resize(conv.output_size());
  for (std::size_t b = 0; b < batch; ++b) {
    omp::conv2d_forward<T>(conv, images.subspan(b * pixels, pixels), params_.conv_w.values(),
                           params_.conv_b.values(), conv_out);
    for (T& v : conv_out) v = relu(v);
    omp::maxpool2x2_forward<T>(pool, conv_out, std::span<T>(a.pooled).subspan(b * flat, flat),
                               std::span<std::uint8_t>(a.argmax).subspan(b * flat, flat));
  }

  a.fc1.resize(batch * h1);
  omp::dense_forward<T>({batch, flat, h1}, a.pooled, params_.fc1_w.values(), params_.fc1_b.values(), a.fc1);
  for (T& v : a.fc1) v = relu(v);

  a.drop_scale.assign(batch * h1, T(1));
  a.fc1_out.assign(a.fc1.begin(), a.fc1.end());
  if (mode == Mode::Train && c.dropout > 0.0) {
    Rng rng(dropout_seed);
    const T keep = T(1.0 / (1.0 - c.dropout));
    for (std::size_t i = 0; i < a.fc1.size(); ++i) {
      a.drop_scale[i] = rng.uniform() < c.dropout ? T(0) : keep;
      a.fc1_out[i] = a.fc1[i] * a.drop_scale[i];
    }
  }

  a.fc2.resize(batch * h2);
  omp::dense_forward<T>({batch, h1, h2}, a.fc1_out, params_.fc2_w.values(), params_.fc2_b.values(), a.fc2);
  for (T& v : a.fc2) v = relu(v);

  a.predictions.resize(batch);
  omp::dense_forward<T>({batch, h2, 1}, a.fc2, params_.fc3_w.values(), params_.fc3_b.values(), a.predictions);
  for (T& v : a.predictions) v = sigmoid(v);
}

template <typename T>
std::vector<T> CnnModel<T>::predict(std::span<const T> images, std::size_t count) const {
  constexpr std::size_t kChunk = 64;
  const std::size_t pixels = config_.image_size();
  if (images.size() != count * pixels) throw ShapeError("predict: image buffer does not match count");
  std::vector<T> out;
  out.reserve(count);
  for (std::size_t start = 0; start < count; start += kChunk) {
    const std::size_t n = std::min(kChunk, count - start);
    const auto acts = forward(images.subspan(start * pixels, n * pixels), n, Mode::Eval);
    out.insert(out.end(), acts.predictions.begin(), acts.predictions.end());
  }
  return out;
}

template <typename T>
double mean_bce(std::span<const T> predictions, std::span<const T> targets) {
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double p = std::clamp(static_cast<double>(predictions[i]), kBceEpsilon, 1.0 - kBceEpsilon);
    const double y = targets[i];
    total += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  return predictions.empty() ? 0.0 : total / static_cast<double>(predictions.size());
}

template <typename T>
T CnnModel<T>::backward(const Activations& a, std::span<const T> targets, Parameters<T>& grads) const {
  BackwardScratch scratch;
  return backward(a, targets, grads, scratch);
}

template <typename T>
T CnnModel<T>::backward(const Activations& a, std::span<const T> targets, Parameters<T>& grads,
                        BackwardScratch& s) const {
  const ModelConfig& c = config_;
  const std::size_t batch = a.batch;
  if (targets.size() != batch) throw ShapeError("backward: one target per image required");
  if (grads.fc1_w.shape() != params_.fc1_w.shape()) grads = Parameters<T>::zeros(c);
  const std::size_t flat = c.flatten_dim();
  const auto h1 = static_cast<std::size_t>(c.fc1_units);
  const auto h2 = static_cast<std::size_t>(c.fc2_units);

  auto& g_logit = s.g_logit;
  g_logit.resize(batch);
  for (std::size_t b = 0; b < batch; ++b) g_logit[b] = (a.predictions[b] - targets[b]) / static_cast<T>(batch);

  auto& g2 = s.g2;
  g2.resize(batch * h2);
  omp::dense_backward<T>({batch, h2, 1}, a.fc2, params_.fc3_w.values(), g_logit, g2, grads.fc3_w.values(),
                         grads.fc3_b.values());
  for (std::size_t i = 0; i < g2.size(); ++i)
    if (!(a.fc2[i] > T(0))) g2[i] = T(0);

  auto& g1 = s.g1;
  g1.resize(batch * h1);
  omp::dense_backward<T>({batch, h1, h2}, a.fc1_out, params_.fc2_w.values(), g2, g1, grads.fc2_w.values(),
                         grads.fc2_b.values());
  for (std::size_t i = 0; i < g1.size(); ++i) g1[i] = a.fc1[i] > T(0) ? g1[i] * a.drop_scale[i] : T(0);

  auto& g_pooled = s.g_pooled;
  g_pooled.resize(batch * flat);
  omp::dense_backward<T>({batch, flat, h1}, a.pooled, params_.fc1_w.values(), g1, g_pooled, grads.fc1_w.values(),
                         grads.fc1_b.values());

  // Pool and relu route each pooled gradient to the conv output at the
  // window's argmax, and only where that output was positive.
  const ConvDims conv{1,
                      static_cast<std::size_t>(c.input_height),
                      static_cast<std::size_t>(c.input_width),
                      static_cast<std::size_t>(c.kernel_size),
                      static_cast<std::size_t>(c.kernel_size),
                      static_cast<std::size_t>(c.filters)};
  const std::size_t nf = conv.filters, cw = conv.out_w();
  const std::size_t pw = c.pooled_width(), ph = c.pooled_height();
  const std::size_t pixels = c.image_size();
  auto& g_conv = s.g_conv;
  auto& part_w = s.part_w;
  auto& part_b = s.part_b;
  g_conv.resize(conv.output_size());
  part_w.resize(conv.filter_size());
  part_b.resize(nf);
  grads.conv_w.fill(T(0));
  grads.conv_b.fill(T(0));
  for (std::size_t b = 0; b < batch; ++b) {
    std::fill(g_conv.begin(), g_conv.end(), T(0));
    const T* gp = g_pooled.data() + b * flat;
    const T* pooled = a.pooled.data() + b * flat;
    const std::uint8_t* arg = a.argmax.data() + b * flat;
    for (std::size_t py = 0; py < ph; ++py)
      for (std::size_t px = 0; px < pw; ++px)
        for (std::size_t f = 0; f < nf; ++f) {
          const std::size_t o = (py * pw + px) * nf + f;
          if (!(pooled[o] > T(0))) continue;
          const std::size_t y = 2 * py + arg[o] / 2, x = 2 * px + arg[o] % 2;
          g_conv[(y * cw + x) * nf + f] = gp[o];
        }
    omp::conv2d_backward<T>(conv, std::span<const T>(a.images).subspan(b * pixels, pixels), params_.conv_w.values(),
                            g_conv, {}, part_w, part_b);
    for (std::size_t i = 0; i < part_w.size(); ++i) grads.conv_w[i] += part_w[i];
    for (std::size_t f = 0; f < nf; ++f) grads.conv_b[f] += part_b[f];
  }

  return static_cast<T>(mean_bce<T>(a.predictions, targets));
}

template struct Parameters<float>;
template struct Parameters<double>;
template class CnnModel<float>;
template class CnnModel<double>;
template double mean_bce<float>(std::span<const float>, std::span<const float>);
template double mean_bce<double>(std::span<const double>, std::span<const double>);

}  // namespace wander::nn
