#pragma once

// Explicit float/double instantiations shared by both kernel families.

#include "wander/nn/kernels.hpp"

#define WANDER_INSTANTIATE(T)                                                                                        \
  template void conv2d_forward<T>(const ConvDims&, std::span<const T>, std::span<const T>, std::span<const T>,      \
                                  std::span<T>);                                                                    \
  template void conv2d_backward<T>(const ConvDims&, std::span<const T>, std::span<const T>, std::span<const T>,     \
                                   std::span<T>, std::span<T>, std::span<T>);                                       \
  template void maxpool2x2_forward<T>(const PoolDims&, std::span<const T>, std::span<T>, std::span<std::uint8_t>); \
  template void maxpool2x2_backward<T>(const PoolDims&, std::span<const T>, std::span<const std::uint8_t>,          \
                                       std::span<T>);                                                               \
  template void dense_forward<T>(const DenseDims&, std::span<const T>, std::span<const T>, std::span<const T>,      \
                                 std::span<T>);                                                                     \
  template void dense_backward<T>(const DenseDims&, std::span<const T>, std::span<const T>, std::span<const T>,     \
                                  std::span<T>, std::span<T>, std::span<T>);                                        \
  template void adam_update<T>(std::span<T>, std::span<const T>, std::span<T>, std::span<T>,                        \
                               const AdamCoefficients&);
