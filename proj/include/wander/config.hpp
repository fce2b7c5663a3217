#pragma once

// JSON documents accepted by the CLI. Every key is optional and falls back
// to the struct default; unknown keys are rejected so typos surface.
//
// synth:  {"preset": "train_test" | "validation", "seed", "floor_width",
//          "floor_height", "counts": {"Direct": n, "Pacing": n, ...},
//          "start": "YYYY-MM-DDTHH:MM", plus any SynthConfig geometry knob
//          by its field name}
// train:  {"epochs", "batch_size", "learning_rate", "split_fraction",
//          "threshold", "seed", "augment_enabled",
//          "augment": {"max_rotation_deg", "flip_h_prob", "flip_v_prob",
//                      "copies_per_image", "seed"},
//          "model": {"input_height", "input_width", "kernel_size", "filters",
//                    "fc1_units", "fc2_units", "dropout"}}

#include <string>
#include <string_view>

#include <json.hpp>

#include "wander/augment.hpp"
#include "wander/nn/model.hpp"
#include "wander/pipeline.hpp"
#include "wander/synth.hpp"

namespace wander {

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json synth_config_to_json(const SynthConfig& cfg);

AugmentConfig augment_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json augment_config_to_json(const AugmentConfig& cfg);

nn::ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json model_config_to_json(const nn::ModelConfig& cfg);

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json train_config_to_json(const TrainConfig& cfg);

// Parses text and dispatches; malformed JSON raises ConfigError.
nlohmann::json parse_config_text(std::string_view text);

}  // namespace wander
