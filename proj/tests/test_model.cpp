#include <doctest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "wander/nn/adam.hpp"
#include "wander/nn/model.hpp"
#include "wander/nn/weights_io.hpp"

using namespace wander;
using namespace wander::nn;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.input_height = 16;
  cfg.input_width = 16;
  cfg.fc1_units = 8;
  cfg.fc2_units = 4;
  return cfg;
}

template <typename T>
std::vector<T> random_images(const ModelConfig& cfg, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<T> v(count * cfg.image_size());
  for (auto& x : v) x = static_cast<T>(rng.uniform());
  return v;
}

template <typename T>
void randomize_biases(Parameters<T>& p, std::uint64_t seed) {
  Rng rng(seed);
  for (Tensor<T>* b : {&p.conv_b, &p.fc1_b, &p.fc2_b, &p.fc3_b})
    for (T& v : b->values()) v = static_cast<T>(rng.uniform(0.05, 0.3));
}

}  // namespace

TEST_CASE("model: default architecture has 8,131,009 parameters") {
  const ModelConfig cfg;
  CHECK(cfg.flatten_dim() == 127008);
  CHECK(cfg.parameter_count() == 8131009);
  const auto p = Parameters<float>::zeros(cfg);
  std::size_t total = 0;
  for (const auto* t : p.list()) total += t->size();
  CHECK(total == 8131009);
  CHECK(p.conv_w.shape() == Shape{3, 3, 32});
  CHECK(p.fc1_w.shape() == Shape{127008, 64});
  CHECK(p.fc3_w.shape() == Shape{32, 1});
}

TEST_CASE("model: configuration checks") {
  ModelConfig cfg;
  cfg.filters = 16;
  CHECK_THROWS(cfg.check());
  cfg = ModelConfig{};
  cfg.dropout = 1.0;
  CHECK_THROWS(cfg.check());
  cfg = ModelConfig{};
  cfg.input_height = 3;
  CHECK_THROWS(cfg.check());
  cfg = ModelConfig{};
  cfg.fc1_units = 0;
  CHECK_THROWS(cfg.check());
  CHECK_NOTHROW(ModelConfig{}.check());
}

TEST_CASE("model: forward on the full-size network yields probabilities") {
  const ModelConfig cfg;
  const CnnModel<float> model(cfg, 42);
  const auto images = random_images<float>(cfg, 3, 1);
  const auto acts = model.forward(images, 3, Mode::Eval);
  REQUIRE(acts.predictions.size() == 3);
  for (float p : acts.predictions) {
    CHECK(p > 0.0f);
    CHECK(p < 1.0f);
  }
  const auto again = model.forward(images, 3, Mode::Eval);
  CHECK(std::memcmp(acts.predictions.data(), again.predictions.data(), 3 * sizeof(float)) == 0);
  CHECK(model.predict(images, 3) == acts.predictions);
  CHECK_THROWS_AS(model.forward(std::span<const float>(images).first(100), 3, Mode::Eval), ShapeError);
}

TEST_CASE("model: initialization depends only on the seed") {
  const auto cfg = small_config();
  CHECK(CnnModel<float>(cfg, 5).parameters() == CnnModel<float>(cfg, 5).parameters());
  CHECK(!(CnnModel<float>(cfg, 5).parameters() == CnnModel<float>(cfg, 6).parameters()));
  const auto p = CnnModel<double>(cfg, 5).parameters();
  const double limit = std::sqrt(6.0 / 9.0);
  for (double w : p.conv_w.values()) CHECK(std::fabs(w) <= limit);
  for (double b : p.fc1_b.values()) CHECK(b == 0.0);
}

TEST_CASE("model: predict matches batched forward across chunk boundaries") {
  const auto cfg = small_config();
  const CnnModel<float> model(cfg, 3);
  const auto images = random_images<float>(cfg, 70, 2);
  const auto batch = model.forward(images, 70, Mode::Eval);
  CHECK(model.predict(images, 70) == batch.predictions);
}

TEST_CASE("model: composed gradient matches central differences") {
  const auto cfg = small_config();
  CnnModel<double> model(cfg, 11);
  randomize_biases(model.parameters(), 12);
  const std::size_t batch = 3;
  const auto images = random_images<double>(cfg, batch, 13);
  const std::vector<double> targets{1.0, 0.0, 1.0};
  const std::uint64_t dropout_seed = 99;

  auto grads = Parameters<double>::zeros(cfg);
  const auto acts = model.forward(images, batch, Mode::Train, dropout_seed);
  const double loss = model.backward(acts, targets, grads);
  CHECK(loss == doctest::Approx(mean_bce<double>(acts.predictions, targets)).epsilon(1e-12));

  const auto f = [&] {
    const auto a = model.forward(images, batch, Mode::Train, dropout_seed);
    return mean_bce<double>(a.predictions, targets);
  };
  auto params = model.parameters().list();
  const auto analytic = std::as_const(grads).list();
  for (std::size_t k = 0; k < params.size(); ++k) {
    double worst = 0.0;
    for (std::size_t i = 0; i < params[k]->size(); ++i)
      worst = std::fmax(worst,
                        oracle::relative_error((*analytic[k])[i], oracle::central_difference(f, (*params[k])[i])));
    INFO("parameter ", Parameters<double>::kNames[k]);
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("model: ten Adam steps lower the loss for at least 95 of 100 seeds") {
  // Default layer widths on a 16x16 input.
  nn::ModelConfig cfg;
  cfg.input_height = 16;
  cfg.input_width = 16;
  const std::size_t batch = 8;
  int decreased = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CnnModel<float> model(cfg, seed);
    const auto images = random_images<float>(cfg, batch, 1000 + seed);
    std::vector<float> targets(batch);
    for (std::size_t i = 0; i < batch; ++i) targets[i] = static_cast<float>(i % 2);
    const auto eval_loss = [&] { return mean_bce<float>(model.predict(images, batch), targets); };
    const double before = eval_loss();
    AdamState<float> state;
    auto grads = Parameters<float>::zeros(cfg);
    for (int step = 0; step < 10; ++step) {
      const auto acts = model.forward(images, batch, Mode::Train, derive_seed(seed, step));
      model.backward(acts, targets, grads);
      adam_step(model.parameters(), grads, state);
    }
    const double after = eval_loss();
    if (!(after < before)) MESSAGE("seed ", seed, " ", before, " -> ", after);
    decreased += after < before ? 1 : 0;
  }
  CHECK(decreased >= 95);
}

TEST_CASE("adam: first step moves each weight by about the learning rate against the gradient") {
  Tensor<double> w({3}, std::vector<double>{0.5, -0.2, 1.0});
  const Tensor<double> g({3}, std::vector<double>{2.0, -0.01, 0.0});
  AdamState<double> state;
  adam_step<double>({&w}, {&g}, state);
  CHECK(state.t == 1);
  CHECK(w[0] == doctest::Approx(0.5 - 0.001).epsilon(1e-6));
  CHECK(w[1] == doctest::Approx(-0.2 + 0.001).epsilon(1e-6));
  CHECK(w[2] == 1.0);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  Tensor<float> w({4}, std::vector<float>{1, 2, 3, 4});
  const auto original = w;
  const Tensor<float> g({4}, 0.0f);
  AdamState<float> state;
  for (int i = 0; i < 5; ++i) adam_step<float>({&w}, {&g}, state);
  CHECK(w == original);
}

TEST_CASE("adam: minimises (w - 3)^2") {
  const auto run = [](double lr, int steps, std::vector<double>* moves) {
    AdamConfig cfg;
    cfg.learning_rate = lr;
    AdamState<double> state(cfg);
    Tensor<double> w({1}, 0.0), g({1});
    for (int i = 0; i < steps; ++i) {
      g[0] = 2.0 * (w[0] - 3.0);
      const double before = w[0];
      adam_step<double>({&w}, {&g}, state);
      if (moves) moves->push_back(std::fabs(w[0] - before));
    }
    return w[0];
  };
  CHECK(std::fabs(run(0.1, 200, nullptr) - 3.0) < 0.5);
  // At the default rate each step moves at most about the learning rate.
  std::vector<double> moves;
  const double w = run(1e-3, 200, &moves);
  for (double m : moves) CHECK(m <= 1e-3 * 1.001);
  CHECK(w > 0.15);
  CHECK(w <= 0.2 + 1e-9);
}

TEST_CASE("adam: mismatched buffers and bad configs throw") {
  Tensor<float> a({2}), b({3});
  const Tensor<float> ga({2}), gb({3});
  AdamState<float> state;
  CHECK_THROWS_AS(adam_step<float>({&a}, {&gb}, state), ShapeError);
  adam_step<float>({&a}, {&ga}, state);
  CHECK_THROWS_AS(adam_step<float>({&b}, {&gb}, state), ShapeError);
  AdamConfig cfg;
  cfg.beta1 = 1.0;
  CHECK_THROWS(cfg.check());
  cfg = AdamConfig{};
  cfg.learning_rate = 0.0;
  CHECK_THROWS(cfg.check());
}

TEST_CASE("weights: save and load roundtrip is bit identical") {
  const auto cfg = small_config();
  CnnModel<float> model(cfg, 21);
  randomize_biases(model.parameters(), 22);
  const std::string bytes = save_weights(model);
  const auto loaded = load_weights<float>(bytes);
  CHECK(loaded.config() == cfg);
  CHECK(loaded.parameters() == model.parameters());
  CHECK(save_weights(loaded) == bytes);
  const auto images = random_images<float>(cfg, 100, 23);
  const auto a = model.predict(images, 100), b = loaded.predict(images, 100);
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

TEST_CASE("weights: corrupt files are rejected") {
  const auto cfg = small_config();
  const std::string bytes = save_weights(CnnModel<float>(cfg, 1));
  CHECK_THROWS_AS(load_weights<float>(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(load_weights<float>(bytes.substr(0, 5)), FormatError);
  CHECK_THROWS_AS(load_weights<float>(std::string_view{}), FormatError);
  CHECK_THROWS_AS(load_weights<float>(bytes + "x"), FormatError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(load_weights<float>(bad_magic), FormatError);
  std::string bad_version = bytes;
  bad_version[8] = 7;
  CHECK_THROWS_AS(load_weights<float>(bad_version), FormatError);
}

TEST_CASE("weights: architecture mismatch is a shape error") {
  auto cfg = small_config();
  const std::string bytes = save_weights(CnnModel<float>(cfg, 1));
  auto wider = cfg;
  wider.fc1_units = 16;
  CHECK_THROWS_AS(load_weights<float>(bytes, wider), ShapeError);
  CHECK_NOTHROW(load_weights<float>(bytes, cfg));
}
