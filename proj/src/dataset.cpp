#include "wander/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <json.hpp>

#include "wander/error.hpp"

namespace wander {

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t count) {
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') throw SchemaError("bad timestamp '" + std::string(text) + "'");
    value = value * 10 + (c - '0');
  }
  return value;
}

std::chrono::sys_days to_days(const Timestamp& ts) {
  using namespace std::chrono;
  return sys_days{year{ts.year} / month{static_cast<unsigned>(ts.month)} / day{static_cast<unsigned>(ts.day)}};
}

const char* violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::OutOfBounds: return "out-of-bounds";
    case ViolationKind::EmptyTrace: return "empty-trace";
    case ViolationKind::DuplicateInterval: return "duplicate-interval";
    case ViolationKind::LabelConflict: return "label-conflict";
    case ViolationKind::IntervalMismatch: return "interval-mismatch";
  }
  return "unknown";
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  // YYYY-MM-DDTHH:MM
  if (text.size() != 16 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':')
    throw SchemaError("bad timestamp '" + std::string(text) + "', expected YYYY-MM-DDTHH:MM");
  Timestamp ts{parse_digits(text, 0, 4), parse_digits(text, 5, 2), parse_digits(text, 8, 2),
               parse_digits(text, 11, 2), parse_digits(text, 14, 2)};
  using namespace std::chrono;
  const year_month_day ymd{year{ts.year}, month{static_cast<unsigned>(ts.month)},
                           day{static_cast<unsigned>(ts.day)}};
  if (!ymd.ok() || ts.hour > 23 || ts.minute > 59)
    throw SchemaError("timestamp out of range '" + std::string(text) + "'");
  return ts;
}

std::string format_timestamp(const Timestamp& ts) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d", ts.year, ts.month, ts.day, ts.hour, ts.minute);
  return buf;
}

Timestamp interval_of(const Timestamp& ts) {
  Timestamp out = ts;
  out.minute = 0;
  return out;
}

Timestamp add_hours(const Timestamp& ts, long long hours) {
  using namespace std::chrono;
  const long long total = static_cast<long long>(ts.hour) + hours;
  long long day_shift = total / 24;
  long long hour = total % 24;
  if (hour < 0) {
    hour += 24;
    --day_shift;
  }
  const year_month_day ymd{to_days(ts) + days{day_shift}};
  return Timestamp{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
                   static_cast<int>(static_cast<unsigned>(ymd.day())), static_cast<int>(hour), ts.minute};
}

TraceDataset parse_dataset(std::string_view json, int floor_width, int floor_height) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json.begin(), json.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_array()) throw SchemaError("dataset must be a JSON array of points");

  std::map<Timestamp, HourTrace> groups;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const auto where = " (point " + std::to_string(i) + ")";
    if (!item.is_object()) throw SchemaError("point is not an object" + where);
    for (const char* key : {"x", "y", "date", "stress"})
      if (!item.contains(key)) throw SchemaError(std::string("missing key '") + key + "'" + where);
    if (!item["x"].is_number() || !item["y"].is_number())
      throw SchemaError("coordinates must be numbers" + where);
    if (!item["date"].is_string()) throw SchemaError("'date' must be a string" + where);
    if (!item["stress"].is_boolean()) throw SchemaError("'stress' must be a boolean" + where);

    PathPoint p;
    p.x = item["x"].get<double>();
    p.y = item["y"].get<double>();
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw SchemaError("non-finite coordinate" + where);
    p.timestamp = parse_timestamp(item["date"].get<std::string>());
    p.wandering = item["stress"].get<bool>();

    const Timestamp key = interval_of(p.timestamp);
    auto [it, inserted] = groups.try_emplace(key);
    HourTrace& trace = it->second;
    if (inserted) {
      trace.interval_start = key;
      trace.label = p.wandering;
    } else if (trace.label != p.wandering) {
      throw LabelConflictError("interval " + format_timestamp(key) + " mixes stress values" + where);
    }
    trace.points.push_back(p);
  }

  TraceDataset dataset;
  dataset.floor_width = floor_width;
  dataset.floor_height = floor_height;
  dataset.traces.reserve(groups.size());
  for (auto& [key, trace] : groups) dataset.traces.push_back(std::move(trace));
  return dataset;
}

std::string serialize_dataset(const TraceDataset& dataset) {
  std::vector<const HourTrace*> order;
  order.reserve(dataset.traces.size());
  for (const auto& t : dataset.traces) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(),
                   [](const HourTrace* a, const HourTrace* b) { return a->interval_start < b->interval_start; });

  std::string out = "[";
  bool first = true;
  for (const HourTrace* trace : order) {
    for (const PathPoint& p : trace->points) {
      nlohmann::ordered_json item;
      item["x"] = p.x;
      item["y"] = p.y;
      item["date"] = format_timestamp(p.timestamp);
      item["stress"] = p.wandering;
      out += first ? "\n  " : ",\n  ";
      out += item.dump();
      first = false;
    }
  }
  out += first ? "]" : "\n]";
  return out;
}

std::vector<Violation> validate(const TraceDataset& dataset) {
  std::vector<Violation> out;
  std::map<Timestamp, std::size_t> seen;
  const auto w = static_cast<double>(dataset.floor_width);
  const auto h = static_cast<double>(dataset.floor_height);
  auto add = [&out](ViolationKind kind, std::size_t index, std::string detail) {
    out.push_back({kind, index,
                   "trace " + std::to_string(index) + ": " + violation_name(kind) + ": " + std::move(detail)});
  };

  for (std::size_t ti = 0; ti < dataset.traces.size(); ++ti) {
    const HourTrace& trace = dataset.traces[ti];
    const auto interval = format_timestamp(trace.interval_start);
    if (trace.points.empty()) add(ViolationKind::EmptyTrace, ti, "no points in " + interval);
    if (auto [it, inserted] = seen.try_emplace(trace.interval_start, ti); !inserted)
      add(ViolationKind::DuplicateInterval, ti, interval + " already used by trace " + std::to_string(it->second));
    if (trace.interval_start.minute != 0)
      add(ViolationKind::IntervalMismatch, ti, "interval start " + interval + " is not on the hour");

    bool label_conflict = false;
    bool interval_mismatch = false;
    for (std::size_t pi = 0; pi < trace.points.size(); ++pi) {
      const PathPoint& p = trace.points[pi];
      if (!(p.x >= 0.0 && p.x < w && p.y >= 0.0 && p.y < h)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "point %zu at (%g, %g) outside %dx%d", pi, p.x, p.y,
                      dataset.floor_width, dataset.floor_height);
        add(ViolationKind::OutOfBounds, ti, buf);
      }
      label_conflict = label_conflict || p.wandering != trace.label;
      interval_mismatch = interval_mismatch || interval_of(p.timestamp) != trace.interval_start;
    }
    if (label_conflict) add(ViolationKind::LabelConflict, ti, "points disagree with trace label in " + interval);
    if (interval_mismatch) add(ViolationKind::IntervalMismatch, ti, "points outside interval " + interval);
  }
  return out;
}

DatasetStats dataset_stats(const TraceDataset& dataset) {
  DatasetStats s;
  for (const auto& t : dataset.traces) {
    (t.label ? s.hours_wandering : s.hours_normal) += 1;
    s.points_total += t.points.size();
  }
  return s;
}

}  // namespace wander
