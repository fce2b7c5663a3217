#include "wander/config.hpp"

#include <functional>
#include <map>

#include "wander/error.hpp"

namespace wander {
namespace {

using Json = nlohmann::json;
using Setters = std::map<std::string, std::function<void(const Json&)>>;

void apply(const Json& j, const Setters& setters, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + key + "' in " + std::string(where) + " config");
    try {
      it->second(value);
    } catch (const Json::exception&) {
      throw ConfigError("key '" + key + "' in " + std::string(where) + " config has the wrong type");
    }
  }
}

template <typename T>
std::function<void(const Json&)> bind(T& field) {
  return [&field](const Json& v) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("expected an integer, got " + v.dump());
    } else {
      if (!v.is_number()) throw ConfigError("expected a number, got " + v.dump());
    }
    field = v.get<T>();
  };
}

}  // namespace

Json parse_config_text(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

SynthConfig synth_config_from_json(const Json& j) {
  SynthConfig cfg;
  if (j.is_object() && j.contains("preset")) {
    const auto& preset = j["preset"];
    if (preset == "train_test") cfg = train_test_config(cfg.seed);
    else if (preset == "validation") cfg = validation_config(cfg.seed);
    else throw ConfigError("unknown synth preset " + preset.dump());
  }
  Setters s{
      {"preset", [](const Json&) {}},
      {"seed", bind(cfg.seed)},
      {"floor_width", bind(cfg.floor_width)},
      {"floor_height", bind(cfg.floor_height)},
      {"step_length", bind(cfg.step_length)},
      {"jitter", bind(cfg.jitter)},
      {"min_points", bind(cfg.min_points)},
      {"max_points", bind(cfg.max_points)},
      {"loop_radius_min", bind(cfg.loop_radius_min)},
      {"loop_radius_max", bind(cfg.loop_radius_max)},
      {"loop_aspect_min", bind(cfg.loop_aspect_min)},
      {"loops_min", bind(cfg.loops_min)},
      {"loops_max", bind(cfg.loops_max)},
      {"pacing_span_min", bind(cfg.pacing_span_min)},
      {"pacing_span_max", bind(cfg.pacing_span_max)},
      {"pacing_lateral", bind(cfg.pacing_lateral)},
      {"pacing_passes_min", bind(cfg.pacing_passes_min)},
      {"pacing_passes_max", bind(cfg.pacing_passes_max)},
      {"waypoints_min", bind(cfg.waypoints_min)},
      {"waypoints_max", bind(cfg.waypoints_max)},
      {"leg_min", bind(cfg.leg_min)},
      {"leg_max", bind(cfg.leg_max)},
      {"turn_min_deg", bind(cfg.turn_min_deg)},
      {"turn_max_deg", bind(cfg.turn_max_deg)},
      {"max_attempts", bind(cfg.max_attempts)},
      {"start",
       [&](const Json& v) {
         try {
           cfg.start = parse_timestamp(v.get<std::string>());
         } catch (const DataError& e) {
           throw ConfigError(e.what());
         }
       }},
      {"counts",
       [&](const Json& v) {
         if (!v.is_object()) throw ConfigError("counts must be an object");
         cfg.counts.clear();
         for (const auto& [name, n] : v.items()) {
           if (!n.is_number_integer() || n.get<long long>() < 0)
             throw ConfigError("count for " + name + " must be a non-negative integer");
           cfg.counts[parse_pattern_name(name)] = n.get<int>();
         }
       }},
  };
  apply(j, s, "synth");
  cfg.check();
  return cfg;
}

nlohmann::ordered_json synth_config_to_json(const SynthConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["floor_width"] = cfg.floor_width;
  j["floor_height"] = cfg.floor_height;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (PatternKind k : kAllPatterns)
    if (auto it = cfg.counts.find(k); it != cfg.counts.end()) counts[std::string(pattern_name(k))] = it->second;
  j["counts"] = counts;
  j["start"] = format_timestamp(cfg.start);
  j["step_length"] = cfg.step_length;
  j["jitter"] = cfg.jitter;
  j["min_points"] = cfg.min_points;
  j["max_points"] = cfg.max_points;
  j["loop_radius_min"] = cfg.loop_radius_min;
  j["loop_radius_max"] = cfg.loop_radius_max;
  j["loop_aspect_min"] = cfg.loop_aspect_min;
  j["loops_min"] = cfg.loops_min;
  j["loops_max"] = cfg.loops_max;
  j["pacing_span_min"] = cfg.pacing_span_min;
  j["pacing_span_max"] = cfg.pacing_span_max;
  j["pacing_lateral"] = cfg.pacing_lateral;
  j["pacing_passes_min"] = cfg.pacing_passes_min;
  j["pacing_passes_max"] = cfg.pacing_passes_max;
  j["waypoints_min"] = cfg.waypoints_min;
  j["waypoints_max"] = cfg.waypoints_max;
  j["leg_min"] = cfg.leg_min;
  j["leg_max"] = cfg.leg_max;
  j["turn_min_deg"] = cfg.turn_min_deg;
  j["turn_max_deg"] = cfg.turn_max_deg;
  j["max_attempts"] = cfg.max_attempts;
  return j;
}

AugmentConfig augment_config_from_json(const Json& j) {
  AugmentConfig cfg;
  apply(j,
        {{"max_rotation_deg", bind(cfg.max_rotation_deg)},
         {"flip_h_prob", bind(cfg.flip_h_prob)},
         {"flip_v_prob", bind(cfg.flip_v_prob)},
         {"copies_per_image", bind(cfg.copies_per_image)},
         {"seed", bind(cfg.seed)}},
        "augment");
  cfg.check();
  return cfg;
}

nlohmann::ordered_json augment_config_to_json(const AugmentConfig& cfg) {
  nlohmann::ordered_json j;
  j["max_rotation_deg"] = cfg.max_rotation_deg;
  j["flip_h_prob"] = cfg.flip_h_prob;
  j["flip_v_prob"] = cfg.flip_v_prob;
  j["copies_per_image"] = cfg.copies_per_image;
  j["seed"] = cfg.seed;
  return j;
}

nn::ModelConfig model_config_from_json(const Json& j) {
  nn::ModelConfig cfg;
  apply(j,
        {{"input_height", bind(cfg.input_height)},
         {"input_width", bind(cfg.input_width)},
         {"kernel_size", bind(cfg.kernel_size)},
         {"filters", bind(cfg.filters)},
         {"fc1_units", bind(cfg.fc1_units)},
         {"fc2_units", bind(cfg.fc2_units)},
         {"dropout", bind(cfg.dropout)}},
        "model");
  try {
    cfg.check();
  } catch (const ShapeError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

nlohmann::ordered_json model_config_to_json(const nn::ModelConfig& cfg) {
  nlohmann::ordered_json j;
  j["input_height"] = cfg.input_height;
  j["input_width"] = cfg.input_width;
  j["kernel_size"] = cfg.kernel_size;
  j["filters"] = cfg.filters;
  j["fc1_units"] = cfg.fc1_units;
  j["fc2_units"] = cfg.fc2_units;
  j["dropout"] = cfg.dropout;
  return j;
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig cfg;
  apply(j,
        {{"epochs", bind(cfg.epochs)},
         {"batch_size", bind(cfg.batch_size)},
         {"learning_rate", bind(cfg.learning_rate)},
         {"split_fraction", bind(cfg.split_fraction)},
         {"threshold", bind(cfg.threshold)},
         {"seed", bind(cfg.seed)},
         {"augment_enabled", bind(cfg.augment_enabled)},
         {"augment", [&](const Json& v) { cfg.augment = augment_config_from_json(v); }},
         {"model", [&](const Json& v) { cfg.model = model_config_from_json(v); }}},
        "train");
  try {
    cfg.check();
  } catch (const ShapeError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

nlohmann::ordered_json train_config_to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["split_fraction"] = cfg.split_fraction;
  j["threshold"] = cfg.threshold;
  j["seed"] = cfg.seed;
  j["augment_enabled"] = cfg.augment_enabled;
  j["augment"] = augment_config_to_json(cfg.augment);
  j["model"] = model_config_to_json(cfg.model);
  return j;
}

}  // namespace wander
