#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "wander/dataset.hpp"
#include "wander/rng.hpp"

namespace wander {

// Movement archetypes. Direct is the normal class; the other three are
// wandering.
enum class PatternKind { Direct, Pacing, Lapping, Random };

inline constexpr std::array<PatternKind, 4> kAllPatterns{PatternKind::Direct, PatternKind::Pacing,
                                                         PatternKind::Lapping, PatternKind::Random};

constexpr bool is_wandering(PatternKind kind) noexcept { return kind != PatternKind::Direct; }

std::string_view pattern_name(PatternKind kind) noexcept;
// Case-sensitive; "Normal" is accepted as an alias for Direct.
PatternKind parse_pattern_name(std::string_view name);

struct SynthConfig {
  int floor_width = 640;
  int floor_height = 480;
  std::uint64_t seed = 1;
  std::map<PatternKind, int> counts;

  double step_length = 10.0;  // mean spacing between consecutive points
  double jitter = 2.0;        // positional noise sd, clamped at 3 sd
  int min_points = 20;
  int max_points = 120;
  Timestamp start{2024, 1, 1, 0, 0};

  // Lapping: ellipses with semi-major axis in [radius_min, radius_max].
  double loop_radius_min = 30.0;
  double loop_radius_max = 90.0;
  double loop_aspect_min = 0.7;
  int loops_min = 2;
  int loops_max = 3;

  // Pacing: back-and-forth between two anchors with a small sideways drift
  // between passes.
  double pacing_span_min = 60.0;
  double pacing_span_max = 250.0;
  double pacing_lateral = 4.0;
  int pacing_passes_min = 4;
  int pacing_passes_max = 8;

  // Random: straight legs between non-repeating waypoints.
  int waypoints_min = 4;
  int waypoints_max = 6;
  double leg_min = 60.0;
  double leg_max = 250.0;
  double turn_min_deg = 45.0;
  double turn_max_deg = 110.0;

  int max_attempts = 2000;

  // Throws ConfigError.
  void check() const;
};

// Compositions of the reference train/test (200 hours) and validation
// (20 hours) datasets.
SynthConfig train_test_config(std::uint64_t seed);
SynthConfig validation_config(std::uint64_t seed);

// One hour of movement. Every point carries `interval` with minutes spread
// across the hour. Throws GenerationError when the geometry cannot be placed
// inside the floor after cfg.max_attempts tries.
HourTrace gen_trace(PatternKind kind, const SynthConfig& cfg, Rng& rng, const Timestamp& interval);

struct SynthResult {
  TraceDataset dataset;
  std::vector<PatternKind> kinds;  // generating kind per trace
};

// counts[k] traces per kind, shuffled, on consecutive hours from cfg.start.
// Trace i draws from the stream derive_seed(cfg.seed, 1, i), so the result
// does not depend on the thread count.
SynthResult gen_dataset_with_kinds(const SynthConfig& cfg);
TraceDataset gen_dataset(const SynthConfig& cfg);

}  // namespace wander
