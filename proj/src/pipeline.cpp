#include "wander/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "wander/error.hpp"
#include "wander/nn/adam.hpp"
#include "wander/raster.hpp"
#include "wander/rng.hpp"

namespace wander {

void TrainConfig::check() const {
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw ConfigError("split_fraction must lie in (0, 1)");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  augment.check();
  model.check();
}

Metrics compute_metrics(std::span<const double> predictions, const std::vector<bool>& labels, double threshold) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("compute_metrics: " + std::to_string(predictions.size()) + " predictions for " +
                                std::to_string(labels.size()) + " labels");
  Metrics m;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool positive = predictions[i] >= threshold;
    if (positive && labels[i]) ++m.tp;
    else if (positive) ++m.fp;
    else if (labels[i]) ++m.fn;
    else ++m.tn;
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  // Harmonic mean of precision and recall written over the counts, which
  // avoids the rounding of the two intermediate ratios.
  m.f1 = ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn);
  m.accuracy = ratio(m.tp + m.tn, predictions.size());
  return m;
}

std::string metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["tn"] = m.tn;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["accuracy"] = m.accuracy;
  return j.dump();
}

SplitResult split(const TraceDataset& dataset, double fraction, std::uint64_t seed) {
  if (dataset.traces.empty()) throw DataError("cannot split an empty dataset");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0, 1)");

  // Class 0 = wandering, class 1 = normal; the order is the tie-break order.
  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t i = 0; i < dataset.traces.size(); ++i) members[dataset.traces[i].label ? 0 : 1].push_back(i);

  SplitResult out;
  const std::array<const char*, 2> names{"wandering", "normal"};
  for (std::size_t c = 0; c < 2; ++c)
    if (members[c].empty())
      out.warnings.push_back(std::string("no ") + names[c] + " traces; split proceeds unstratified for that class");

  const double n = static_cast<double>(dataset.traces.size());
  const auto total = static_cast<std::size_t>(std::llround(fraction * n));
  std::array<std::size_t, 2> take{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const double quota = fraction * static_cast<double>(members[c].size());
    take[c] = static_cast<std::size_t>(std::floor(quota));
    remainder[c] = quota - std::floor(quota);
    assigned += take[c];
  }
  while (assigned < total) {
    std::size_t best = 2;
    for (std::size_t c = 0; c < 2; ++c)
      if (take[c] < members[c].size() && (best == 2 || remainder[c] > remainder[best])) best = c;
    if (best == 2) break;
    ++take[best];
    remainder[best] = -1.0;
    ++assigned;
  }

  for (std::size_t c = 0; c < 2; ++c) {
    auto shuffled = members[c];
    Rng rng(derive_seed(seed, c));
    rng.shuffle(shuffled);
    out.train_indices.insert(out.train_indices.end(), shuffled.begin(), shuffled.begin() + take[c]);
    out.test_indices.insert(out.test_indices.end(), shuffled.begin() + take[c], shuffled.end());
  }
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());

  for (TraceDataset* part : {&out.train, &out.test}) {
    part->floor_width = dataset.floor_width;
    part->floor_height = dataset.floor_height;
  }
  for (std::size_t i : out.train_indices) out.train.traces.push_back(dataset.traces[i]);
  for (std::size_t i : out.test_indices) out.test.traces.push_back(dataset.traces[i]);
  return out;
}

LabeledImages dataset_images(const TraceDataset& dataset, int side) {
  LabeledImages out;
  const auto n = dataset.traces.size();
  out.images.resize(n);
  out.labels.resize(n);
  std::string error;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      out.images[i] = trace_to_network_image(dataset.traces[i], dataset.floor_width, dataset.floor_height, side);
    } catch (const std::exception& e) {
#pragma omp critical(wander_images_error)
      if (error.empty()) error = "trace " + std::to_string(i) + ": " + e.what();
    }
  }
  if (!error.empty()) throw RasterError(error);
  for (std::size_t i = 0; i < n; ++i) out.labels[i] = dataset.traces[i].label;
  return out;
}

namespace {

std::vector<float> pack_images(const std::vector<GrayImage>& images, const nn::ModelConfig& cfg) {
  const std::size_t px = cfg.image_size();
  std::vector<float> buffer(images.size() * px);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const GrayImage& img = images[i];
    if (img.width != cfg.input_width || img.height != cfg.input_height)
      throw ShapeError("image " + std::to_string(i) + " is " + std::to_string(img.width) + "x" +
                           std::to_string(img.height) + ", model expects " + std::to_string(cfg.input_width) + "x" +
                           std::to_string(cfg.input_height));
    if (img.mode != ScaleMode::Unit) throw ShapeError("model input images must be unit-scale");
    std::transform(img.pixels.begin(), img.pixels.end(), buffer.begin() + static_cast<std::ptrdiff_t>(i * px),
                   [](double v) { return static_cast<float>(v); });
  }
  return buffer;
}

double accuracy_of(std::span<const float> predictions, std::span<const float> targets, double threshold) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    correct += ((predictions[i] >= threshold) == (targets[i] > 0.5f)) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

}  // namespace

TrainHistory train(nn::CnnModel<float>& model, const LabeledImages& train_set, const LabeledImages& test_set,
                   const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.check();
  if (train_set.images.empty()) throw DataError("training set is empty");
  if (train_set.images.size() != train_set.labels.size() || test_set.images.size() != test_set.labels.size())
    throw DataError("image and label counts differ");
  const nn::ModelConfig& mc = model.config();
  const std::size_t px = mc.image_size();

  const std::vector<float> test_pixels = pack_images(test_set.images, mc);
  std::vector<float> test_targets(test_set.labels.size());
  for (std::size_t i = 0; i < test_targets.size(); ++i) test_targets[i] = test_set.labels[i] ? 1.0f : 0.0f;

  nn::AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.learning_rate;
  nn::AdamState<float> adam(adam_cfg);
  auto grads = nn::Parameters<float>::zeros(mc);

  nn::CnnModel<float>::Activations acts;
  nn::CnnModel<float>::BackwardScratch scratch;
  TrainHistory history;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto ep = static_cast<std::uint64_t>(epoch);
    LabeledImages epoch_set;
    if (cfg.augment_enabled) {
      AugmentConfig ac = cfg.augment;
      ac.seed = derive_seed(cfg.augment.seed, ep);
      epoch_set = augment_set(train_set, ac);
    } else {
      epoch_set = train_set;
    }
    const std::vector<float> pixels = pack_images(epoch_set.images, mc);
    std::vector<std::size_t> order(epoch_set.images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream, ep));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0, correct_sum = 0.0;
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    std::vector<float> batch_pixels;
    std::vector<float> batch_targets;
    for (std::size_t start = 0, b = 0; start < order.size(); start += bs, ++b) {
      const std::size_t n = std::min(bs, order.size() - start);
      batch_pixels.resize(n * px);
      batch_targets.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[start + k];
        std::copy_n(pixels.begin() + static_cast<std::ptrdiff_t>(src * px), px,
                    batch_pixels.begin() + static_cast<std::ptrdiff_t>(k * px));
        batch_targets[k] = epoch_set.labels[src] ? 1.0f : 0.0f;
      }
      model.forward(batch_pixels, n, nn::Mode::Train, derive_seed(cfg.seed, kDropoutStream, ep, b), acts);
      const float loss = model.backward(acts, batch_targets, grads, scratch);
      nn::adam_step(model.parameters(), grads, adam);
      loss_sum += static_cast<double>(loss) * static_cast<double>(n);
      correct_sum += accuracy_of(acts.predictions, batch_targets, cfg.threshold) * static_cast<double>(n);
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.train_acc = correct_sum / static_cast<double>(order.size());
    if (test_targets.empty()) {
      rec.test_loss = rec.test_acc = std::numeric_limits<double>::quiet_NaN();
    } else {
      const auto preds = model.predict(test_pixels, test_targets.size());
      rec.test_loss = nn::mean_bce<float>(preds, test_targets);
      rec.test_acc = accuracy_of(preds, test_targets, cfg.threshold);
    }
    history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

std::vector<double> predict_images(const nn::CnnModel<float>& model, const LabeledImages& images) {
  const auto pixels = pack_images(images.images, model.config());
  const auto preds = model.predict(pixels, images.images.size());
  return {preds.begin(), preds.end()};
}

Metrics evaluate(const nn::CnnModel<float>& model, const LabeledImages& images, double threshold) {
  if (images.images.empty()) throw DataError("cannot evaluate on an empty dataset");
  const auto preds = predict_images(model, images);
  return compute_metrics(preds, images.labels, threshold);
}

namespace {

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string export_history(const TrainHistory& history) {
  std::string out = "epoch,train_loss,train_acc,test_loss,test_acc\n";
  for (const EpochRecord& r : history) {
    out += std::to_string(r.epoch);
    for (double v : {r.train_loss, r.train_acc, r.test_loss, r.test_acc}) out += "," + format_g6(v);
    out += "\n";
  }
  return out;
}

TrainHistory parse_history(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != "epoch,train_loss,train_acc,test_loss,test_acc")
    throw ParseError("history CSV: unexpected header");
  TrainHistory history;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw ParseError("history CSV: expected 5 columns in '" + line + "'");
    EpochRecord r;
    try {
      r.epoch = std::stoi(cells[0]);
      r.train_loss = std::stod(cells[1]);
      r.train_acc = std::stod(cells[2]);
      r.test_loss = std::stod(cells[3]);
      r.test_acc = std::stod(cells[4]);
    } catch (const std::logic_error&) {
      throw ParseError("history CSV: non-numeric value in '" + line + "'");
    }
    history.push_back(r);
  }
  return history;
}

}  // namespace wander
