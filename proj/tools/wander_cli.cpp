// wander: command-line front end for synthesis, rendering, training and
// evaluation. Exit status: 0 ok, 1 usage/config, 2 data, 3 model/weights.

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wander/config.hpp"
#include "wander/dataset.hpp"
#include "wander/error.hpp"
#include "wander/nn/weights_io.hpp"
#include "wander/pipeline.hpp"
#include "wander/raster.hpp"
#include "wander/rng.hpp"
#include "wander/synth.hpp"

namespace fs = std::filesystem;
using namespace wander;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kModel = 3 };

struct IoError {
  Exit code;
  std::string message;
};

std::string read_file(const std::string& path, Exit code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError{code, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes, Exit code) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError{code, "cannot write " + path};
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError{code, "failed writing " + path};
}

struct Floor {
  int width = 640;
  int height = 480;
};

void add_floor_options(CLI::App* cmd, Floor& floor) {
  cmd->add_option("--floor-width", floor.width, "Floor plan width in pixels")->check(CLI::PositiveNumber);
  cmd->add_option("--floor-height", floor.height, "Floor plan height in pixels")->check(CLI::PositiveNumber);
}

TraceDataset load_dataset(const std::string& path, const Floor& floor) {
  TraceDataset d = parse_dataset(read_file(path, kData), floor.width, floor.height);
  const auto violations = validate(d);
  if (!violations.empty())
    throw DataError(path + ": " + violations.front().message + " (" + std::to_string(violations.size()) +
                    " violation(s))");
  return d;
}

nn::CnnModel<float> load_model(const std::string& path) {
  return nn::load_weights<float>(read_file(path, kModel));
}

std::string trace_file_stem(std::size_t index, const HourTrace& t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04zu_%04d%02d%02d_%02d", index, t.interval_start.year, t.interval_start.month,
                t.interval_start.day, t.interval_start.hour);
  return buf;
}

void write_trace_pngs(const std::vector<GrayImage>& images, const TraceDataset& d, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError{kData, "cannot create directory " + dir};
  for (std::size_t i = 0; i < images.size(); ++i)
    write_png(images[i], (fs::path(dir) / (trace_file_stem(i, d.traces[i]) + ".png")).string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize indoor movement traces, render them and train a wandering classifier."};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a labeled trace dataset");
  std::string synth_config, synth_out, synth_preset;
  std::uint64_t synth_seed = 0;
  synth->add_option("--config", synth_config, "Synth config JSON")->check(CLI::ExistingFile);
  synth->add_option("--preset", synth_preset, "Composition preset")
      ->check(CLI::IsMember({"train_test", "validation"}));
  auto* seed_opt = synth->add_option("--seed", synth_seed, "Override the config seed");
  synth->add_option("--out", synth_out, "Output dataset JSON")->required();

  // render
  auto* render = app.add_subcommand("render", "Write one floor-size stroke PNG per trace");
  std::string render_data, render_dir;
  Floor render_floor;
  render->add_option("--data", render_data, "Dataset JSON")->required();
  render->add_option("--out-dir", render_dir, "Output directory")->required();
  add_floor_options(render, render_floor);

  // export-images
  auto* exporter = app.add_subcommand("export-images", "Write the normalized network-input images as PNGs");
  std::string export_data, export_dir;
  Floor export_floor;
  int export_side = kNetworkSide;
  exporter->add_option("--data", export_data, "Dataset JSON")->required();
  exporter->add_option("--out-dir", export_dir, "Output directory")->required();
  exporter->add_option("--side", export_side, "Output side length")->check(CLI::PositiveNumber);
  add_floor_options(exporter, export_floor);

  // train
  auto* trainer = app.add_subcommand("train", "Split, train and write weights plus history");
  std::string train_data, train_config, train_weights, train_history;
  Floor train_floor;
  bool quiet = false;
  trainer->add_option("--data", train_data, "Train/test dataset JSON")->required();
  trainer->add_option("--config", train_config, "Train config JSON")->check(CLI::ExistingFile);
  trainer->add_option("--weights", train_weights, "Output weights file")->required();
  trainer->add_option("--history", train_history, "Output history CSV")->required();
  trainer->add_flag("--quiet", quiet, "No per-epoch progress on stderr");
  add_floor_options(trainer, train_floor);

  // eval
  auto* evaluator = app.add_subcommand("eval", "Print metrics JSON for a labeled dataset");
  std::string eval_data, eval_weights;
  double eval_threshold = 0.5;
  Floor eval_floor;
  evaluator->add_option("--data", eval_data, "Dataset JSON")->required();
  evaluator->add_option("--weights", eval_weights, "Weights file")->required();
  evaluator->add_option("--threshold", eval_threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
  add_floor_options(evaluator, eval_floor);

  // predict
  auto* predictor = app.add_subcommand("predict", "Print interval,probability,label per trace");
  std::string pred_data, pred_weights;
  double pred_threshold = 0.5;
  Floor pred_floor;
  predictor->add_option("--data", pred_data, "Dataset JSON")->required();
  predictor->add_option("--weights", pred_weights, "Weights file")->required();
  predictor->add_option("--threshold", pred_threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
  add_floor_options(predictor, pred_floor);

  // stats
  auto* stats = app.add_subcommand("stats", "Print hour and point counts of a dataset as JSON");
  std::string stats_data;
  Floor stats_floor;
  stats->add_option("--data", stats_data, "Dataset JSON")->required();
  add_floor_options(stats, stats_floor);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*synth) {
      SynthConfig cfg;
      if (!synth_config.empty()) cfg = synth_config_from_json(parse_config_text(read_file(synth_config, kUsage)));
      else if (synth_preset == "validation") cfg = validation_config(cfg.seed);
      else if (synth_preset == "train_test") cfg = train_test_config(cfg.seed);
      else throw ConfigError("synth needs --config or --preset");
      if (!synth_config.empty() && !synth_preset.empty())
        throw ConfigError("--config and --preset are mutually exclusive");
      if (*seed_opt) cfg.seed = synth_seed;
      write_file(synth_out, serialize_dataset(gen_dataset(cfg)), kData);
    } else if (*render) {
      const auto d = load_dataset(render_data, render_floor);
      std::vector<GrayImage> images(d.traces.size());
      for (std::size_t i = 0; i < images.size(); ++i)
        images[i] = rasterize_trace(d.traces[i], d.floor_width, d.floor_height);
      write_trace_pngs(images, d, render_dir);
    } else if (*exporter) {
      const auto d = load_dataset(export_data, export_floor);
      write_trace_pngs(dataset_images(d, export_side).images, d, export_dir);
    } else if (*trainer) {
      TrainConfig cfg;
      if (!train_config.empty()) cfg = train_config_from_json(parse_config_text(read_file(train_config, kUsage)));
      const auto d = load_dataset(train_data, train_floor);
      if (cfg.model.input_width != cfg.model.input_height)
        throw ConfigError("model input must be square to match the rasterizer");
      const auto parts = split(d, cfg.split_fraction, derive_seed(cfg.seed, kSplitStream));
      for (const auto& w : parts.warnings) std::cerr << "warning: " << w << "\n";
      const auto train_images = dataset_images(parts.train, cfg.model.input_width);
      const auto test_images = dataset_images(parts.test, cfg.model.input_width);
      nn::CnnModel<float> model(cfg.model, derive_seed(cfg.seed, kInitStream));
      EpochCallback progress;
      if (!quiet)
        progress = [&](const EpochRecord& r) {
          std::fprintf(stderr, "epoch %d/%d train_loss %.4f train_acc %.4f test_loss %.4f test_acc %.4f\n", r.epoch,
                       cfg.epochs, r.train_loss, r.train_acc, r.test_loss, r.test_acc);
        };
      const auto history = train(model, train_images, test_images, cfg, progress);
      write_file(train_weights, nn::save_weights(model), kModel);
      write_file(train_history, export_history(history), kData);
    } else if (*evaluator) {
      const auto model = load_model(eval_weights);
      const auto d = load_dataset(eval_data, eval_floor);
      const auto metrics = evaluate(model, dataset_images(d, model.config().input_width), eval_threshold);
      std::cout << metrics_json(metrics) << "\n";
    } else if (*predictor) {
      const auto model = load_model(pred_weights);
      const auto d = load_dataset(pred_data, pred_floor);
      const auto probs = predict_images(model, dataset_images(d, model.config().input_width));
      for (std::size_t i = 0; i < probs.size(); ++i)
        std::printf("%s,%.6f,%s\n", format_timestamp(d.traces[i].interval_start).c_str(), probs[i],
                    probs[i] >= pred_threshold ? "wandering" : "normal");
    } else if (*stats) {
      const auto d = load_dataset(stats_data, stats_floor);
      const auto s = dataset_stats(d);
      nlohmann::ordered_json j;
      j["hours_wandering"] = s.hours_wandering;
      j["hours_normal"] = s.hours_normal;
      j["points_total"] = s.points_total;
      nlohmann::ordered_json per = nlohmann::ordered_json::object();
      for (const auto& t : d.traces) per[format_timestamp(t.interval_start)] = t.points.size();
      j["points_per_interval"] = per;
      std::cout << j.dump() << "\n";
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
