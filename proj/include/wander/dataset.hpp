#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wander {

// Calendar date plus hour and minute, no time zone. The (date, hour) part is
// the grouping key for traces.
struct Timestamp {
  int year = 2000;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

// Accepts exactly "YYYY-MM-DDTHH:MM"; throws SchemaError otherwise.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(const Timestamp& ts);

// Truncates the minute; two timestamps share an interval iff these compare equal.
Timestamp interval_of(const Timestamp& ts);
Timestamp add_hours(const Timestamp& ts, long long hours);

struct PathPoint {
  double x = 0.0;
  double y = 0.0;
  Timestamp timestamp;
  bool wandering = false;

  friend bool operator==(const PathPoint&, const PathPoint&) = default;
};

struct HourTrace {
  Timestamp interval_start;
  std::vector<PathPoint> points;  // movement order
  bool label = false;             // true = wandering

  friend bool operator==(const HourTrace&, const HourTrace&) = default;
};

struct TraceDataset {
  int floor_width = 640;
  int floor_height = 480;
  std::vector<HourTrace> traces;

  friend bool operator==(const TraceDataset&, const TraceDataset&) = default;
};

// Wire format: a JSON array of {"x": number, "y": number,
// "date": "YYYY-MM-DDTHH:MM", "stress": boolean}. The wire key "stress" maps
// to PathPoint::wandering. Points are grouped by (date, hour) keeping file
// order inside each group; traces come out sorted by interval.
//
// Throws ParseError on malformed JSON, SchemaError on missing or mistyped
// keys, LabelConflictError when one interval mixes stress values. Floor
// bounds are not checked here; see validate().
TraceDataset parse_dataset(std::string_view json, int floor_width = 640, int floor_height = 480);

// Flat array, traces in interval order, points in movement order, one point
// per line. An empty dataset serializes to "[]".
std::string serialize_dataset(const TraceDataset& dataset);

enum class ViolationKind { OutOfBounds, EmptyTrace, DuplicateInterval, LabelConflict, IntervalMismatch };

struct Violation {
  ViolationKind kind;
  std::size_t trace_index;
  std::string message;
};

std::vector<Violation> validate(const TraceDataset& dataset);

struct DatasetStats {
  std::size_t hours_wandering = 0;
  std::size_t hours_normal = 0;
  std::size_t points_total = 0;
};

DatasetStats dataset_stats(const TraceDataset& dataset);

}  // namespace wander
