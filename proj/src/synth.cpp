#include "wander/synth.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>

#include "wander/error.hpp"

namespace wander {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNoiseClampSd = 3.0;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }
Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }
Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

double segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

// Axis-aligned region that keeps jittered points strictly inside the floor.
struct Box {
  double x0, y0, x1, y1;

  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

Box usable_box(const SynthConfig& cfg, double extra_margin) {
  const double m = kNoiseClampSd * cfg.jitter + 1.0 + extra_margin;
  return {m, m, cfg.floor_width - 1.0 - m, cfg.floor_height - 1.0 - m};
}

// Longest segment with direction `dir` that fits in the box.
double max_length_along(const Box& box, Vec2 dir) {
  const double ax = std::abs(dir.x);
  const double ay = std::abs(dir.y);
  const double lx = ax > 1e-12 ? box.width() / ax : INFINITY;
  const double ly = ay > 1e-12 ? box.height() / ay : INFINITY;
  return std::min(lx, ly);
}

// Uniform start so that start + len * dir stays inside the box.
Vec2 place_segment(const Box& box, Vec2 dir, double len, Rng& rng) {
  const double ex = len * dir.x;
  const double ey = len * dir.y;
  const double lo_x = box.x0 + std::max(0.0, -ex);
  const double hi_x = box.x1 - std::max(0.0, ex);
  const double lo_y = box.y0 + std::max(0.0, -ey);
  const double hi_y = box.y1 - std::max(0.0, ey);
  return {rng.uniform(lo_x, std::max(lo_x, hi_x)), rng.uniform(lo_y, std::max(lo_y, hi_y))};
}

double noise(const SynthConfig& cfg, Rng& rng) { return rng.truncated_normal(cfg.jitter, kNoiseClampSd); }

// Straight run from a to b in `steps` equal steps with sideways jitter. The
// first point (a) is emitted only when include_start is set.
void append_leg(std::vector<Vec2>& out, Vec2 a, Vec2 b, int steps, bool include_start, const SynthConfig& cfg,
                Rng& rng) {
  const Vec2 d = b - a;
  const double len = norm(d);
  const Vec2 side = len > 0.0 ? perp((1.0 / len) * d) : Vec2{0.0, 0.0};
  for (int k = include_start ? 0 : 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    out.push_back(a + t * d + noise(cfg, rng) * side);
  }
}

std::vector<Vec2> direct_path(const SynthConfig& cfg, Rng& rng) {
  const Box box = usable_box(cfg, 0.0);
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const Vec2 dir = unit(rng.uniform(0.0, 2.0 * kPi));
    const double fit = max_length_along(box, dir);
    const int n_fit = static_cast<int>(std::floor(fit / cfg.step_length)) + 1;
    const int n_hi = std::min(cfg.max_points, n_fit);
    if (n_hi < cfg.min_points) continue;
    const int n = static_cast<int>(rng.uniform_int(cfg.min_points, n_hi));
    const double len = (n - 1) * cfg.step_length;
    const Vec2 start = place_segment(box, dir, len, rng);
    std::vector<Vec2> pts;
    pts.reserve(n);
    append_leg(pts, start, start + len * dir, n - 1, true, cfg, rng);
    return pts;
  }
  throw GenerationError("direct: no start/end pair fits the floor");
}

std::vector<Vec2> pacing_path(const SynthConfig& cfg, Rng& rng) {
  const Box box = usable_box(cfg, cfg.pacing_lateral);
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const Vec2 dir = unit(rng.uniform(0.0, 2.0 * kPi));
    const double span = std::min(rng.uniform(cfg.pacing_span_min, cfg.pacing_span_max), max_length_along(box, dir));
    const int per_pass = std::max(1, static_cast<int>(std::lround(span / cfg.step_length)));
    const int passes_hi = std::min(cfg.pacing_passes_max, (cfg.max_points - 1) / per_pass);
    const int passes_lo = std::max(cfg.pacing_passes_min, (cfg.min_points - 1 + per_pass - 1) / per_pass);
    if (span < cfg.pacing_span_min || passes_lo > passes_hi) continue;
    const int passes = static_cast<int>(rng.uniform_int(passes_lo, passes_hi));

    const Vec2 a = place_segment(box, dir, span, rng);
    const Vec2 b = a + span * dir;
    const Vec2 side = perp(dir);
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(passes * per_pass + 1));
    double offset = rng.uniform(-cfg.pacing_lateral, cfg.pacing_lateral);
    for (int q = 0; q < passes; ++q) {
      const double next_offset = rng.uniform(-cfg.pacing_lateral, cfg.pacing_lateral);
      const Vec2 from = (q % 2 == 0 ? a : b) + offset * side;
      const Vec2 to = (q % 2 == 0 ? b : a) + next_offset * side;
      append_leg(pts, from, to, per_pass, q == 0, cfg, rng);
      offset = next_offset;
    }
    return pts;
  }
  throw GenerationError("pacing: anchors do not fit the floor");
}

std::vector<Vec2> lapping_path(const SynthConfig& cfg, Rng& rng) {
  const double radial_limit = 1.5 * cfg.jitter;
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const int loops = static_cast<int>(rng.uniform_int(cfg.loops_min, cfg.loops_max));
    const double aspect = rng.uniform(cfg.loop_aspect_min, 1.0);
    // Perimeter ~ radius * per_radius.
    const double per_radius = 2.0 * kPi * std::sqrt((1.0 + aspect * aspect) / 2.0);
    const Box box = usable_box(cfg, radial_limit);
    const double r_fit = std::min(box.width(), box.height()) / 2.0;
    const double r_lo =
        std::max(cfg.loop_radius_min, (cfg.min_points - 1) * cfg.step_length / (loops * per_radius));
    const double r_hi =
        std::min({cfg.loop_radius_max, (cfg.max_points - 1) * cfg.step_length / (loops * per_radius), r_fit});
    if (r_lo > r_hi) continue;
    const double radius = rng.uniform(r_lo, r_hi);
    const int n = std::clamp(static_cast<int>(std::lround(loops * radius * per_radius / cfg.step_length)) + 1,
                             cfg.min_points, cfg.max_points);

    const double tilt = rng.uniform(0.0, 2.0 * kPi);
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const double turn = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const Vec2 center{rng.uniform(box.x0 + radius, box.x1 - radius), rng.uniform(box.y0 + radius, box.y1 - radius)};
    const Vec2 ux = unit(tilt);
    const Vec2 uy = perp(ux);

    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const double theta = phase + turn * 2.0 * kPi * loops * j / (n - 1);
      const Vec2 v = (radius * std::cos(theta)) * ux + (aspect * radius * std::sin(theta)) * uy;
      const double eps = std::clamp(rng.normal() * cfg.jitter, -radial_limit, radial_limit);
      pts.push_back(center + (1.0 + eps / norm(v)) * v);
    }
    return pts;
  }
  throw GenerationError("lapping: no loop radius fits the floor and point budget");
}

double winding_about_centroid(const std::vector<Vec2>& pts) {
  Vec2 c{};
  for (const Vec2& p : pts) c = c + p;
  c = (1.0 / static_cast<double>(pts.size())) * c;
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec2 a = pts[i - 1] - c;
    const Vec2 b = pts[i] - c;
    total += std::atan2(cross(a, b), dot(a, b));
  }
  return total / (2.0 * kPi);
}

std::vector<Vec2> random_path(const SynthConfig& cfg, Rng& rng) {
  const Box box = usable_box(cfg, 0.0);
  const double min_separation = std::max(2.5 * cfg.step_length, 0.5 * cfg.leg_min);
  const double leg_clearance = 4.0 * cfg.step_length;
  const double min_detour = 4.0 * cfg.step_length;
  const double turn_lo = cfg.turn_min_deg * kPi / 180.0;
  const double turn_hi = cfg.turn_max_deg * kPi / 180.0;

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const int count = static_cast<int>(rng.uniform_int(cfg.waypoints_min, cfg.waypoints_max));
    const int legs = count - 1;
    const double leg_lo = std::max(cfg.leg_min, (cfg.min_points - 1) * cfg.step_length / legs);
    const double leg_hi = std::min(cfg.leg_max, (cfg.max_points - 1) * cfg.step_length / legs);
    if (leg_lo > leg_hi) continue;

    std::vector<Vec2> way{{rng.uniform(box.x0, box.x1), rng.uniform(box.y0, box.y1)}};
    double heading = rng.uniform(0.0, 2.0 * kPi);
    bool ok = true;
    for (int i = 1; i < count && ok; ++i) {
      ok = false;
      for (int tries = 0; tries < 64 && !ok; ++tries) {
        const double len = rng.uniform(leg_lo, leg_hi);
        const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
        const double h = i == 1 ? heading : heading + sign * rng.uniform(turn_lo, turn_hi);
        const Vec2 cand = way.back() + len * unit(h);
        if (!box.contains(cand)) continue;
        bool clear = true;
        for (const Vec2& w : way) clear = clear && norm(cand - w) > min_separation;
        for (std::size_t j = 0; clear && j + 2 < way.size(); ++j)
          clear = segment_distance(way[j], way[j + 1], way.back(), cand) >= leg_clearance;
        if (!clear) continue;
        way.push_back(cand);
        heading = h;
        ok = true;
      }
    }
    if (!ok) continue;

    double detour = 0.0;
    for (const Vec2& w : way) detour = std::max(detour, point_segment_distance(w, way.front(), way.back()));
    if (detour < min_detour) continue;

    std::vector<Vec2> pts;
    for (int i = 0; i < legs; ++i) {
      const int steps = std::max(1, static_cast<int>(std::lround(norm(way[i + 1] - way[i]) / cfg.step_length)));
      append_leg(pts, way[i], way[i + 1], steps, i == 0, cfg, rng);
    }
    const int n = static_cast<int>(pts.size());
    if (n < cfg.min_points || n > cfg.max_points) continue;
    if (std::abs(winding_about_centroid(pts)) >= 1.0) continue;
    return pts;
  }
  throw GenerationError("random: no non-repeating waypoint tour fits the floor");
}

}  // namespace

std::string_view pattern_name(PatternKind kind) noexcept {
  switch (kind) {
    case PatternKind::Direct: return "Direct";
    case PatternKind::Pacing: return "Pacing";
    case PatternKind::Lapping: return "Lapping";
    case PatternKind::Random: return "Random";
  }
  return "Direct";
}

PatternKind parse_pattern_name(std::string_view name) {
  if (name == "Direct" || name == "Normal") return PatternKind::Direct;
  if (name == "Pacing") return PatternKind::Pacing;
  if (name == "Lapping") return PatternKind::Lapping;
  if (name == "Random") return PatternKind::Random;
  throw ConfigError("unknown pattern '" + std::string(name) + "'");
}

void SynthConfig::check() const {
  if (floor_width < 16 || floor_height < 16) throw ConfigError("floor must be at least 16x16 pixels");
  if (!(step_length > 0.0)) throw ConfigError("step_length must be > 0");
  if (!(jitter >= 0.0)) throw ConfigError("jitter must be >= 0");
  if (min_points < 2 || max_points < min_points) throw ConfigError("points_per_trace needs 2 <= min <= max");
  for (const auto& [kind, n] : counts)
    if (n < 0) throw ConfigError("negative count for " + std::string(pattern_name(kind)));
  if (!(loop_radius_min > 0.0) || loop_radius_max < loop_radius_min)
    throw ConfigError("loop radius range is empty");
  if (!(loop_aspect_min > 0.0 && loop_aspect_min <= 1.0)) throw ConfigError("loop_aspect_min must be in (0, 1]");
  if (loops_min < 2 || loops_max < loops_min) throw ConfigError("lapping needs loops_min >= 2");
  if (!(pacing_span_min > 0.0) || pacing_span_max < pacing_span_min) throw ConfigError("pacing span range is empty");
  if (pacing_passes_min < 4 || pacing_passes_max < pacing_passes_min)
    throw ConfigError("pacing needs at least 4 passes (3 reversals)");
  if (!(pacing_lateral >= 0.0)) throw ConfigError("pacing_lateral must be >= 0");
  if (waypoints_min < 4 || waypoints_max < waypoints_min) throw ConfigError("random needs at least 4 waypoints");
  if (!(leg_min > 2.0 * step_length) || leg_max < leg_min) throw ConfigError("random legs must exceed 2 steps");
  if (!(turn_min_deg >= 0.0 && turn_max_deg >= turn_min_deg && turn_max_deg < 180.0))
    throw ConfigError("turn angle range must lie in [0, 180)");
  if (max_attempts < 1) throw ConfigError("max_attempts must be positive");
}

SynthConfig train_test_config(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.counts = {{PatternKind::Lapping, 59}, {PatternKind::Random, 11}, {PatternKind::Pacing, 30},
                {PatternKind::Direct, 100}};
  return cfg;
}

SynthConfig validation_config(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.counts = {{PatternKind::Lapping, 7}, {PatternKind::Random, 2}, {PatternKind::Pacing, 1},
                {PatternKind::Direct, 10}};
  return cfg;
}

HourTrace gen_trace(PatternKind kind, const SynthConfig& cfg, Rng& rng, const Timestamp& interval) {
  std::vector<Vec2> pts;
  switch (kind) {
    case PatternKind::Direct: pts = direct_path(cfg, rng); break;
    case PatternKind::Pacing: pts = pacing_path(cfg, rng); break;
    case PatternKind::Lapping: pts = lapping_path(cfg, rng); break;
    case PatternKind::Random: pts = random_path(cfg, rng); break;
  }

  HourTrace trace;
  trace.interval_start = interval_of(interval);
  trace.label = is_wandering(kind);
  trace.points.reserve(pts.size());
  const auto n = static_cast<long>(pts.size());
  for (long j = 0; j < n; ++j) {
    PathPoint p;
    p.x = pts[j].x;
    p.y = pts[j].y;
    p.timestamp = trace.interval_start;
    p.timestamp.minute = static_cast<int>(j * 60 / n);
    p.wandering = trace.label;
    trace.points.push_back(p);
  }
  return trace;
}

SynthResult gen_dataset_with_kinds(const SynthConfig& cfg) {
  cfg.check();
  std::vector<PatternKind> kinds;
  for (PatternKind kind : kAllPatterns) {
    auto it = cfg.counts.find(kind);
    if (it != cfg.counts.end()) kinds.insert(kinds.end(), static_cast<std::size_t>(it->second), kind);
  }
  Rng order_rng(derive_seed(cfg.seed, 0));
  order_rng.shuffle(kinds);

  SynthResult result;
  result.kinds = kinds;
  result.dataset.floor_width = cfg.floor_width;
  result.dataset.floor_height = cfg.floor_height;
  result.dataset.traces.resize(kinds.size());
  const Timestamp start = interval_of(cfg.start);

  std::exception_ptr failure;
  const auto count = static_cast<long>(kinds.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      Rng rng(derive_seed(cfg.seed, 1, static_cast<std::uint64_t>(i)));
      result.dataset.traces[i] = gen_trace(kinds[i], cfg, rng, add_hours(start, i));
    } catch (...) {
#pragma omp critical(wander_synth_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

TraceDataset gen_dataset(const SynthConfig& cfg) { return gen_dataset_with_kinds(cfg).dataset; }

}  // namespace wander
