#include <doctest.h>

#include "wander/config.hpp"

using namespace wander;
using nlohmann::json;

TEST_CASE("config: empty objects give defaults") {
  const auto t = train_config_from_json(json::object());
  CHECK(t.epochs == 150);
  CHECK(t.batch_size == 64);
  CHECK(t.learning_rate == 1e-3);
  CHECK(t.split_fraction == 0.75);
  CHECK(t.model == nn::ModelConfig{});
  const auto s = synth_config_from_json(json::object());
  CHECK(s.floor_width == 640);
  CHECK(s.floor_height == 480);
}

TEST_CASE("config: train settings roundtrip through JSON") {
  TrainConfig t;
  t.epochs = 12;
  t.batch_size = 16;
  t.learning_rate = 0.005;
  t.seed = 99;
  t.augment_enabled = false;
  t.augment.copies_per_image = 2;
  t.augment.flip_v_prob = 0.25;
  t.model.fc1_units = 128;
  t.model.dropout = 0.5;
  const auto j = train_config_to_json(t);
  const auto back = train_config_from_json(json::parse(j.dump()));
  CHECK(back.epochs == 12);
  CHECK(back.batch_size == 16);
  CHECK(back.learning_rate == 0.005);
  CHECK(back.seed == 99);
  CHECK(!back.augment_enabled);
  CHECK(back.augment.copies_per_image == 2);
  CHECK(back.augment.flip_v_prob == 0.25);
  CHECK(back.model == t.model);
  CHECK(train_config_to_json(back) == j);
}

TEST_CASE("config: synth presets and counts") {
  const auto preset = synth_config_from_json(json::parse(R"({"preset": "validation", "seed": 5})"));
  const auto reference = validation_config(5);
  CHECK(preset.seed == 5);
  CHECK(preset.counts == reference.counts);

  const auto custom = synth_config_from_json(
      json::parse(R"({"counts": {"Direct": 3, "Pacing": 2}, "start": "2023-05-06T07:00", "jitter": 1.5})"));
  CHECK(custom.counts.at(PatternKind::Direct) == 3);
  CHECK(custom.counts.at(PatternKind::Pacing) == 2);
  CHECK(custom.start == Timestamp{2023, 5, 6, 7, 0});
  CHECK(custom.jitter == 1.5);
  const auto back = synth_config_from_json(json::parse(synth_config_to_json(custom).dump()));
  CHECK(synth_config_to_json(back) == synth_config_to_json(custom));
}

TEST_CASE("config: errors surface as ConfigError") {
  CHECK_THROWS_AS(train_config_from_json(json::parse(R"({"epoch": 3})")), ConfigError);
  CHECK_THROWS_AS(train_config_from_json(json::parse(R"({"epochs": "three"})")), ConfigError);
  CHECK_THROWS_AS(train_config_from_json(json::parse(R"({"batch_size": 0})")), ConfigError);
  CHECK_THROWS_AS(train_config_from_json(json::parse(R"({"model": {"filters": 8}})")), ConfigError);
  CHECK_THROWS_AS(synth_config_from_json(json::parse(R"({"preset": "huge"})")), ConfigError);
  CHECK_THROWS_AS(synth_config_from_json(json::parse(R"({"counts": {"Sprinting": 1}})")), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_AS(train_config_from_json(json::array()), ConfigError);
}
