#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wander/augment.hpp"
#include "wander/dataset.hpp"
#include "wander/nn/model.hpp"

namespace wander {

struct TrainConfig {
  int epochs = 150;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double split_fraction = 0.75;
  double threshold = 0.5;
  std::uint64_t seed = 1;
  bool augment_enabled = true;
  AugmentConfig augment;
  nn::ModelConfig model;

  void check() const;  // throws ConfigError
};

// Random streams used by one training run, all derived from TrainConfig::seed:
//   derive_seed(seed, kSplitStream)              stratified split
//   derive_seed(seed, kInitStream)               weight initialization
//   derive_seed(seed, kShuffleStream, epoch)     mini-batch order
//   derive_seed(seed, kDropoutStream, epoch, b)  dropout mask of batch b
//   derive_seed(augment.seed, epoch)             that epoch's augmented copies
inline constexpr std::uint64_t kSplitStream = 1;
inline constexpr std::uint64_t kInitStream = 2;
inline constexpr std::uint64_t kShuffleStream = 3;
inline constexpr std::uint64_t kDropoutStream = 4;

struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// prediction >= threshold counts as positive. Zero denominators give 0.
Metrics compute_metrics(std::span<const double> predictions, const std::vector<bool>& labels,
                        double threshold = 0.5);

// Compact JSON object with the four counts and four rates.
std::string metrics_json(const Metrics& m);

struct SplitResult {
  TraceDataset train;
  TraceDataset test;
  std::vector<std::size_t> train_indices;  // ascending
  std::vector<std::size_t> test_indices;   // ascending
  std::vector<std::string> warnings;
};

// Stratified split. The train size is round(fraction * N); it is shared
// between the classes by largest remainder of fraction * class_size, and an
// exact tie goes to the wandering class. Members of each class are drawn by
// a seeded shuffle.
SplitResult split(const TraceDataset& dataset, double fraction, std::uint64_t seed);

// Rasterize, downscale to the model's input size and normalize every trace.
LabeledImages dataset_images(const TraceDataset& dataset, int side = kNetworkSide);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

using TrainHistory = std::vector<EpochRecord>;
using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch Adam training. Each epoch augments the training images afresh
// (when enabled), shuffles them and walks the batches in order; train loss and
// accuracy are averaged over that epoch's batches, test metrics come from an
// eval-mode pass. Test loss/accuracy are NaN when the test set is empty.
TrainHistory train(nn::CnnModel<float>& model, const LabeledImages& train_set, const LabeledImages& test_set,
                   const TrainConfig& cfg, const EpochCallback& on_epoch = {});

std::vector<double> predict_images(const nn::CnnModel<float>& model, const LabeledImages& images);

Metrics evaluate(const nn::CnnModel<float>& model, const LabeledImages& images, double threshold = 0.5);

std::string export_history(const TrainHistory& history);
TrainHistory parse_history(std::string_view csv);

}  // namespace wander
