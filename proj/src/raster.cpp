#include "wander/raster.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>

#include "wander/error.hpp"

namespace wander {

std::vector<Pixel> line_pixels(Pixel a, Pixel b) {
  const int dx = std::abs(b.x - a.x);
  const int dy = std::abs(b.y - a.y);
  const int sx = b.x >= a.x ? 1 : -1;
  const int sy = b.y >= a.y ? 1 : -1;
  const bool x_major = dx >= dy;
  const int major = x_major ? dx : dy;
  const int minor = x_major ? dy : dx;

  std::vector<Pixel> out;
  out.reserve(static_cast<std::size_t>(major) + 1);
  int x = a.x;
  int y = a.y;
  long decision = 2L * minor - major;
  for (int step = 0; step <= major; ++step) {
    out.push_back({x, y});
    if (decision > 0) {
      if (x_major) y += sy; else x += sx;
      decision -= 2L * major;
    }
    decision += 2L * minor;
    if (x_major) x += sx; else y += sy;
  }
  return out;
}

GrayImage rasterize_trace(const HourTrace& trace, int floor_width, int floor_height) {
  GrayImage img(floor_width, floor_height, ScaleMode::Raw);
  std::vector<Pixel> cells;
  cells.reserve(trace.points.size());
  for (const PathPoint& p : trace.points) {
    if (!(p.x >= 0.0 && p.x < floor_width && p.y >= 0.0 && p.y < floor_height)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "point (%g, %g) outside %dx%d floor", p.x, p.y, floor_width, floor_height);
      throw RasterError(buf);
    }
    cells.push_back({static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y))});
  }
  if (cells.size() == 1) img.at(cells[0].x, cells[0].y) = kStrokeValue;
  for (std::size_t i = 1; i < cells.size(); ++i)
    for (const Pixel& px : line_pixels(cells[i - 1], cells[i])) img.at(px.x, px.y) = kStrokeValue;
  return img;
}

GrayImage normalize(const GrayImage& img) {
  if (img.mode != ScaleMode::Raw) throw RasterError("normalize expects a raw (0-255) image");
  GrayImage out = img;
  out.mode = ScaleMode::Unit;
  for (double& v : out.pixels) v /= 255.0;
  return out;
}

namespace {

struct Tap {
  int source;
  double weight;
};

// For each output index, the source cells it covers and the covered length.
std::vector<std::vector<Tap>> coverage(int in_size, int out_size) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out_size));
  const double scale = static_cast<double>(in_size) / out_size;
  for (int o = 0; o < out_size; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    for (int s = static_cast<int>(std::floor(lo)); s < in_size && s < hi; ++s) {
      const double w = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
      if (w > 0.0) taps[o].push_back({s, w});
    }
  }
  return taps;
}

}  // namespace

GrayImage downscale(const GrayImage& img, int out_width, int out_height) {
  if (out_width <= 0 || out_height <= 0 || out_width > img.width || out_height > img.height)
    throw RasterError("downscale from " + std::to_string(img.width) + "x" + std::to_string(img.height) + " to " +
                      std::to_string(out_width) + "x" + std::to_string(out_height) + " is not supported");
  if (out_width == img.width && out_height == img.height) return img;

  const auto cols = coverage(img.width, out_width);
  const auto rows = coverage(img.height, out_height);
  const double area = (static_cast<double>(img.width) / out_width) * (static_cast<double>(img.height) / out_height);

  // Horizontal pass: height x out_width partial sums.
  std::vector<double> partial(static_cast<std::size_t>(img.height) * out_width, 0.0);
  for (int y = 0; y < img.height; ++y) {
    const double* src = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
    double* dst = partial.data() + static_cast<std::size_t>(y) * out_width;
    for (int ox = 0; ox < out_width; ++ox) {
      double acc = 0.0;
      for (const Tap& t : cols[ox]) acc += t.weight * src[t.source];
      dst[ox] = acc;
    }
  }

  GrayImage out(out_width, out_height, img.mode);
  const double cap = img.max_value();
  for (int oy = 0; oy < out_height; ++oy) {
    for (int ox = 0; ox < out_width; ++ox) {
      double acc = 0.0;
      for (const Tap& t : rows[oy]) acc += t.weight * partial[static_cast<std::size_t>(t.source) * out_width + ox];
      out.at(ox, oy) = std::clamp(acc / area, 0.0, cap);
    }
  }
  return out;
}

GrayImage trace_to_network_image(const HourTrace& trace, int floor_width, int floor_height, int side) {
  return normalize(downscale(rasterize_trace(trace, floor_width, floor_height), side, side));
}

void write_png(const GrayImage& img, const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw RasterError("cannot open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw RasterError("libpng initialisation failed");
  }

  std::vector<png_byte> row(static_cast<std::size_t>(img.width));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw RasterError("libpng failed writing " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const double scale = img.mode == ScaleMode::Unit ? 255.0 : 1.0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      row[x] = static_cast<png_byte>(std::clamp(std::lround(img.at(x, y) * scale), 0L, 255L));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace wander
