#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wander/dataset.hpp"

namespace wander {

enum class ScaleMode { Raw, Unit };  // Raw: [0, 255], Unit: [0, 1]

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // row-major, size width * height
  ScaleMode mode = ScaleMode::Raw;

  GrayImage() = default;
  GrayImage(int w, int h, ScaleMode m, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill), mode(m) {}

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double max_value() const { return mode == ScaleMode::Raw ? 255.0 : 1.0; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

inline constexpr double kStrokeValue = 255.0;
inline constexpr int kNetworkSide = 128;

struct Pixel {
  int x;
  int y;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Integer Bresenham walk from a to b, both endpoints included. The major axis
// is x when |dx| >= |dy|. On exact half-pixel ties the minor coordinate stays
// on the side of the start point.
std::vector<Pixel> line_pixels(Pixel a, Pixel b);

// Strokes at 255 on a 0 background, floor-sized. A point maps to pixel
// (floor(x), floor(y)); overlapping strokes saturate. Throws RasterError for
// points outside the floor.
GrayImage rasterize_trace(const HourTrace& trace, int floor_width, int floor_height);

// Raw -> Unit by dividing by 255. Throws RasterError when already Unit.
GrayImage normalize(const GrayImage& img);

// Area-averaging resample: each output pixel is the coverage-weighted mean of
// the source pixels under it. Throws RasterError when asked to upscale.
GrayImage downscale(const GrayImage& img, int out_width = kNetworkSide, int out_height = kNetworkSide);

// rasterize -> downscale -> normalize.
GrayImage trace_to_network_image(const HourTrace& trace, int floor_width, int floor_height,
                                 int side = kNetworkSide);

// 8-bit grayscale PNG. Unit images are scaled by 255; values are rounded.
void write_png(const GrayImage& img, const std::string& path);

}  // namespace wander
