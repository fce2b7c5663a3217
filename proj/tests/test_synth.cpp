#include <doctest.h>

#include <omp.h>

#include <set>

#include "oracles.hpp"
#include "wander/error.hpp"
#include "wander/synth.hpp"

using namespace wander;

namespace {

HourTrace one(PatternKind kind, std::uint64_t seed, const SynthConfig& cfg = SynthConfig{}) {
  Rng rng(seed);
  return gen_trace(kind, cfg, rng, cfg.start);
}

void check_in_bounds(const HourTrace& t, const SynthConfig& cfg) {
  for (const auto& p : t.points) {
    REQUIRE(p.x >= 0.0);
    REQUIRE(p.y >= 0.0);
    REQUIRE(p.x < cfg.floor_width);
    REQUIRE(p.y < cfg.floor_height);
  }
}

}  // namespace

TEST_CASE("pattern names and label mapping") {
  CHECK_FALSE(is_wandering(PatternKind::Direct));
  CHECK(is_wandering(PatternKind::Pacing));
  CHECK(is_wandering(PatternKind::Lapping));
  CHECK(is_wandering(PatternKind::Random));
  for (PatternKind k : kAllPatterns) CHECK(parse_pattern_name(pattern_name(k)) == k);
  CHECK(parse_pattern_name("Normal") == PatternKind::Direct);
  CHECK_THROWS_AS(parse_pattern_name("Spiral"), ConfigError);
}

TEST_CASE("gen_trace: Direct is normal and never reverses along its axis") {
  const SynthConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = one(PatternKind::Direct, seed);
    CHECK_FALSE(t.label);
    CHECK(oracle::axis_reversal_count(oracle::points_of(t)) == 0);
    check_in_bounds(t, cfg);
  }
}

TEST_CASE("gen_trace: Pacing with seed 7 has at least three reversals") {
  const auto t = one(PatternKind::Pacing, 7);
  CHECK(t.label);
  CHECK(oracle::reversal_count(oracle::points_of(t)) >= 3);
}

TEST_CASE("gen_trace: Lapping with seed 7 winds at least twice around its centre") {
  const auto t = one(PatternKind::Lapping, 7);
  const auto p = oracle::points_of(t);
  CHECK(t.label);
  CHECK(std::fabs(oracle::winding_number(p, oracle::centroid(p))) >= 2.0 - 1e-9);
}

TEST_CASE("gen_trace: Lapping closes its loop within three jitter widths") {
  const SynthConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = oracle::points_of(one(PatternKind::Lapping, seed));
    CHECK(std::hypot(p.back().x - p.front().x, p.back().y - p.front().y) <= 3 * cfg.jitter + 1e-9);
  }
}

TEST_CASE("gen_trace: Random never revisits and strays from its chord") {
  const SynthConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = one(PatternKind::Random, seed);
    const auto p = oracle::points_of(t);
    CHECK(t.label);
    CHECK_FALSE(oracle::revisits(p, 2 * cfg.step_length));
    CHECK(oracle::chord_deviation(p) > 2 * cfg.step_length);
  }
}

TEST_CASE("gen_trace: points share one hour and respect the point budget") {
  SynthConfig cfg;
  const Timestamp interval{2024, 6, 1, 13, 0};
  for (PatternKind k : kAllPatterns)
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      const auto t = gen_trace(k, cfg, rng, interval);
      CHECK(t.interval_start == interval);
      CHECK(t.points.size() >= static_cast<std::size_t>(cfg.min_points));
      CHECK(t.points.size() <= static_cast<std::size_t>(cfg.max_points));
      for (const auto& p : t.points) {
        CHECK(interval_of(p.timestamp) == interval);
        CHECK(p.wandering == t.label);
      }
      check_in_bounds(t, cfg);
    }
}

TEST_CASE("gen_trace: geometry that cannot fit raises a generation error") {
  SynthConfig cfg;
  cfg.floor_width = 40;
  cfg.floor_height = 40;
  cfg.max_attempts = 50;
  Rng rng(1);
  CHECK_THROWS_AS(gen_trace(PatternKind::Lapping, cfg, rng, cfg.start), GenerationError);
  CHECK_THROWS_AS(gen_trace(PatternKind::Random, cfg, rng, cfg.start), GenerationError);
}

TEST_CASE("SynthConfig::check rejects invalid knobs") {
  SynthConfig cfg;
  cfg.step_length = 0;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  cfg = SynthConfig{};
  cfg.jitter = -1;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  cfg = SynthConfig{};
  cfg.min_points = 1;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  cfg = SynthConfig{};
  cfg.counts[PatternKind::Pacing] = -2;
  CHECK_THROWS_AS(gen_dataset(cfg), ConfigError);
}

TEST_CASE("gen_dataset: train/test composition gives 200 hours, 100 wandering") {
  const auto r = gen_dataset_with_kinds(train_test_config(5));
  CHECK(r.dataset.traces.size() == 200);
  std::size_t wandering = 0;
  std::map<PatternKind, int> per_kind;
  for (std::size_t i = 0; i < r.kinds.size(); ++i) {
    wandering += r.dataset.traces[i].label ? 1 : 0;
    per_kind[r.kinds[i]] += 1;
    CHECK(r.dataset.traces[i].label == is_wandering(r.kinds[i]));
  }
  CHECK(wandering == 100);
  CHECK(per_kind[PatternKind::Lapping] == 59);
  CHECK(per_kind[PatternKind::Random] == 11);
  CHECK(per_kind[PatternKind::Pacing] == 30);
  CHECK(per_kind[PatternKind::Direct] == 100);
}

TEST_CASE("gen_dataset: validation composition gives 20 hours, 10 wandering") {
  const auto d = gen_dataset(validation_config(5));
  CHECK(d.traces.size() == 20);
  std::size_t wandering = 0;
  for (const auto& t : d.traces) wandering += t.label ? 1 : 0;
  CHECK(wandering == 10);
}

TEST_CASE("gen_dataset: unique sequential intervals and valid output") {
  const auto cfg = train_test_config(2);
  const auto d = gen_dataset(cfg);
  for (std::size_t i = 0; i < d.traces.size(); ++i)
    CHECK(d.traces[i].interval_start == add_hours(cfg.start, static_cast<long long>(i)));
  CHECK(validate(d).empty());
}

TEST_CASE("gen_dataset: same config gives byte-identical output") {
  const auto cfg = train_test_config(77);
  CHECK(serialize_dataset(gen_dataset(cfg)) == serialize_dataset(gen_dataset(cfg)));
  CHECK(serialize_dataset(gen_dataset(cfg)) != serialize_dataset(gen_dataset(train_test_config(78))));
}

TEST_CASE("gen_dataset: output does not depend on the thread count") {
  const auto cfg = train_test_config(31);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto serial = serialize_dataset(gen_dataset(cfg));
  omp_set_num_threads(4);
  const auto parallel = serialize_dataset(gen_dataset(cfg));
  omp_set_num_threads(saved);
  CHECK(serial == parallel);
}

TEST_CASE("gen_dataset: oracles recover the generating kind") {
  SynthConfig cfg;
  cfg.seed = 123;
  for (PatternKind k : kAllPatterns) cfg.counts[k] = 50;
  const auto r = gen_dataset_with_kinds(cfg);
  int hits = 0;
  for (std::size_t i = 0; i < r.kinds.size(); ++i)
    hits += oracle::classify(r.dataset.traces[i], cfg.step_length) == r.kinds[i] ? 1 : 0;
  CHECK(hits >= 190);
}
