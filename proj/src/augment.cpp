#include "wander/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wander/error.hpp"
#include "wander/rng.hpp"

namespace wander {

void AugmentConfig::check() const {
  if (!(max_rotation_deg >= 0.0)) throw ConfigError("max_rotation_deg must be >= 0");
  if (!(flip_h_prob >= 0.0 && flip_h_prob <= 1.0) || !(flip_v_prob >= 0.0 && flip_v_prob <= 1.0))
    throw ConfigError("flip probabilities must lie in [0, 1]");
  if (copies_per_image < 1) throw ConfigError("copies_per_image must be >= 1");
}

GrayImage rotate(const GrayImage& img, double angle_deg, double max_deg) {
  if (!(std::abs(angle_deg) <= max_deg))
    throw ConfigError("rotation of " + std::to_string(angle_deg) + " degrees exceeds the limit of " +
                      std::to_string(max_deg));
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;
  const double cap = img.max_value();

  auto sample = [&img](int x, int y) {
    return (x < 0 || y < 0 || x >= img.width || y >= img.height) ? 0.0 : img.at(x, y);
  };

  GrayImage out(img.width, img.height, img.mode);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // Destination (x, y) reads from the source point rotated by -angle.
      const double dx = x - cx;
      const double dy = y - cy;
      const double sx = c * dx + s * dy + cx;
      const double sy = -s * dx + c * dy + cy;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const double tx = sx - fx;
      const double ty = sy - fy;
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      const double v = (1.0 - ty) * ((1.0 - tx) * sample(x0, y0) + tx * sample(x0 + 1, y0)) +
                       ty * ((1.0 - tx) * sample(x0, y0 + 1) + tx * sample(x0 + 1, y0 + 1));
      out.at(x, y) = std::clamp(v, 0.0, cap);
    }
  }
  return out;
}

GrayImage flip(const GrayImage& img, FlipAxis axis) {
  GrayImage out(img.width, img.height, img.mode);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(x, y) = axis == FlipAxis::Horizontal ? img.at(img.width - 1 - x, y) : img.at(x, img.height - 1 - y);
  return out;
}

LabeledImages augment_set(const LabeledImages& input, const AugmentConfig& cfg) {
  cfg.check();
  if (input.images.size() != input.labels.size()) throw ConfigError("images and labels differ in length");

  const std::size_t per_source = static_cast<std::size_t>(cfg.copies_per_image) + 1;
  const auto count = static_cast<long>(input.images.size());
  LabeledImages out;
  out.images.resize(input.images.size() * per_source);
  out.labels.resize(out.images.size());

#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    const std::size_t base = static_cast<std::size_t>(i) * per_source;
    out.images[base] = input.images[i];
    for (int k = 0; k < cfg.copies_per_image; ++k) {
      const double angle = rng.uniform(-cfg.max_rotation_deg, cfg.max_rotation_deg);
      const bool flip_h = rng.uniform() < cfg.flip_h_prob;
      const bool flip_v = rng.uniform() < cfg.flip_v_prob;
      GrayImage v = angle == 0.0 ? input.images[i] : rotate(input.images[i], angle, cfg.max_rotation_deg);
      if (flip_h) v = flip(v, FlipAxis::Horizontal);
      if (flip_v) v = flip(v, FlipAxis::Vertical);
      out.images[base + 1 + k] = std::move(v);
    }
  }
  // std::vector<bool> is not safe to write from several threads.
  for (std::size_t i = 0; i < out.labels.size(); ++i) out.labels[i] = input.labels[i / per_source];
  return out;
}

}  // namespace wander
