#include <benchmark/benchmark.h>

#include <vector>

#include "wander/nn/kernels.hpp"
#include "wander/rng.hpp"

using namespace wander::nn;

namespace {

// Stroke images are mostly background, so inputs are sparse.
std::vector<float> sparse_input(std::size_t n, double density, std::uint64_t seed) {
  wander::Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = rng.uniform() < density ? static_cast<float>(rng.uniform()) : 0.0f;
  return v;
}

std::vector<float> dense_values(std::size_t n, std::uint64_t seed) {
  wander::Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-0.1, 0.1));
  return v;
}

const ConvDims kConv{8, 128, 128, 3, 3, 32};
const DenseDims kFc1{64, 126 / 2 * (126 / 2) * 32, 64};

template <bool Omp>
void BM_ConvForward(benchmark::State& state) {
  auto in = sparse_input(kConv.input_size(), 0.05, 1);
  auto w = dense_values(kConv.filter_size(), 2);
  std::vector<float> b(kConv.filters, 0.01f), out(kConv.output_size());
  for (auto _ : state) {
    if constexpr (Omp) omp::conv2d_forward<float>(kConv, in, w, b, out);
    else serial::conv2d_forward<float>(kConv, in, w, b, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Omp>
void BM_ConvBackward(benchmark::State& state) {
  auto in = sparse_input(kConv.input_size(), 0.05, 1);
  auto w = dense_values(kConv.filter_size(), 2);
  auto g = sparse_input(kConv.output_size(), 0.2, 3);
  std::vector<float> gw(kConv.filter_size()), gb(kConv.filters);
  for (auto _ : state) {
    if constexpr (Omp) omp::conv2d_backward<float>(kConv, in, w, g, {}, gw, gb);
    else serial::conv2d_backward<float>(kConv, in, w, g, {}, gw, gb);
    benchmark::DoNotOptimize(gw.data());
  }
}

template <bool Omp>
void BM_DenseForward(benchmark::State& state) {
  auto x = sparse_input(kFc1.batch * kFc1.inputs, 0.3, 4);
  auto w = dense_values(kFc1.inputs * kFc1.outputs, 5);
  std::vector<float> b(kFc1.outputs, 0.0f), out(kFc1.batch * kFc1.outputs);
  for (auto _ : state) {
    if constexpr (Omp) omp::dense_forward<float>(kFc1, x, w, b, out);
    else serial::dense_forward<float>(kFc1, x, w, b, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Omp>
void BM_DenseBackward(benchmark::State& state) {
  auto x = sparse_input(kFc1.batch * kFc1.inputs, 0.3, 4);
  auto w = dense_values(kFc1.inputs * kFc1.outputs, 5);
  auto g = dense_values(kFc1.batch * kFc1.outputs, 6);
  std::vector<float> gx(kFc1.batch * kFc1.inputs), gw(w.size()), gb(kFc1.outputs);
  for (auto _ : state) {
    if constexpr (Omp) omp::dense_backward<float>(kFc1, x, w, g, gx, gw, gb);
    else serial::dense_backward<float>(kFc1, x, w, g, gx, gw, gb);
    benchmark::DoNotOptimize(gw.data());
  }
}

}  // namespace

BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<false>)->Name("conv_backward/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<true>)->Name("conv_backward/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DenseForward<false>)->Name("fc1_forward/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DenseForward<true>)->Name("fc1_forward/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DenseBackward<false>)->Name("fc1_backward/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DenseBackward<true>)->Name("fc1_backward/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
