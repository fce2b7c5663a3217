#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace wander {

// Seeding scheme shared by every randomized stage.
//
// A stream is an std::mt19937_64 engine whose seed is derived from a root seed
// and a path of integer stream ids with the SplitMix64 finalizer:
//
//   derive(seed, id) = splitmix64(seed ^ splitmix64(id + 0x9E3779B97F4A7C15))
//
// Uniform reals take the top 53 bits of one engine draw; normals use the
// Box-Muller transform on two uniforms (no cached spare). Both mt19937_64 and
// these transforms are fully specified, so streams do not depend on the
// standard library's distribution implementations.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(seed ^ splitmix64(stream + 0x9E3779B97F4A7C15ULL));
}

template <typename... Ids>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, Ids... rest) noexcept {
  return derive_seed(derive_seed(seed, stream), static_cast<std::uint64_t>(rest)...);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range; lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    auto v = lo + static_cast<std::int64_t>(uniform() * span);
    return v > hi ? hi : v;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Normal(0, sd) with the tail clamped to +-limit_sd standard deviations.
  double truncated_normal(double sd, double limit_sd) {
    double z = normal();
    if (z > limit_sd) z = limit_sd;
    if (z < -limit_sd) z = -limit_sd;
    return sd * z;
  }

  // Fisher-Yates with uniform_int draws.
  template <typename Container>
  void shuffle(Container& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wander
