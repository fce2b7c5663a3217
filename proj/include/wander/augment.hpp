#pragma once

#include <cstdint>
#include <vector>

#include "wander/raster.hpp"

namespace wander {

struct AugmentConfig {
  double max_rotation_deg = 3.0;
  double flip_h_prob = 0.5;
  double flip_v_prob = 0.5;
  int copies_per_image = 4;
  std::uint64_t seed = 7;

  void check() const;  // throws ConfigError
};

enum class FlipAxis { Horizontal, Vertical };

// Rotation about the image center ((w-1)/2, (h-1)/2) by inverse mapping with
// bilinear sampling. Samples falling outside the source read as 0; results
// are clamped to the image mode's range. Throws ConfigError when
// |angle_deg| > max_deg.
GrayImage rotate(const GrayImage& img, double angle_deg, double max_deg = 3.0);

// Horizontal mirrors columns (x -> w-1-x); Vertical mirrors rows.
GrayImage flip(const GrayImage& img, FlipAxis axis);

struct LabeledImages {
  std::vector<GrayImage> images;
  std::vector<bool> labels;
};

// For every source: the source itself followed by copies_per_image variants,
// each rotated by an angle uniform in [-max, +max] and then flipped on each
// axis independently. Source i draws from derive_seed(cfg.seed, i).
LabeledImages augment_set(const LabeledImages& input, const AugmentConfig& cfg);

}  // namespace wander
