#pragma once

// Binary weights file, all integers and reals little-endian:
//
//   bytes 0..7    magic "WANDRCNN"
//   u32           format version (1)
//   i32 x 6       input_height, input_width, kernel_size, filters, fc1_units, fc2_units
//   f64           dropout
//   u32           tensor count (8)
//   per tensor    u32 rank, u64 dims[rank], f64 values[product(dims)]
//
// Tensors appear in the order conv_w, conv_b, fc1_w, fc1_b, fc2_w, fc2_b,
// fc3_w, fc3_b.

#include <cstdint>
#include <string>
#include <string_view>

#include "wander/nn/model.hpp"

namespace wander::nn {

inline constexpr std::string_view kWeightsMagic = "WANDRCNN";
inline constexpr std::uint32_t kWeightsVersion = 1;

template <typename T>
std::string save_weights(const CnnModel<T>& model);

// Throws FormatError on a bad magic, version or truncated/overlong payload
// and ShapeError when tensor shapes disagree with the stored architecture.
template <typename T>
CnnModel<T> load_weights(std::string_view bytes);

// As above, and additionally requires the stored architecture to equal
// `expected` (ShapeError otherwise).
template <typename T>
CnnModel<T> load_weights(std::string_view bytes, const ModelConfig& expected);

}  // namespace wander::nn
