#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

// Runs the CLI with stderr discarded and returns its exit status and stdout.
Result run(const std::string& args) {
  const std::string command = std::string(WANDER_CLI_PATH) + " --threads 1 " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buffer{};
  std::size_t n = 0;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) r.out.append(buffer.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// A fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::path(WANDER_TEST_SCRATCH) / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  std::string operator/(const std::string& file) const { return (dir / file).string(); }
};

}  // namespace

TEST_CASE("cli: usage errors exit 1") {
  CHECK(run("").status == 1);
  CHECK(run("frobnicate").status == 1);
  CHECK(run("eval --data x.json").status == 1);
  CHECK(run("synth --out /dev/null").status == 1);
  CHECK(run("--help").status == 0);
}

TEST_CASE("cli: synth twice with the same config is byte identical") {
  Scratch s("synth_twice");
  spit(s / "c.json", R"({"seed": 3, "counts": {"Direct": 4, "Pacing": 2, "Lapping": 2, "Random": 2}})");
  REQUIRE(run("synth --config " + (s / "c.json") + " --out " + (s / "a.json")).status == 0);
  REQUIRE(run("synth --config " + (s / "c.json") + " --out " + (s / "b.json")).status == 0);
  const auto a = slurp(s / "a.json");
  CHECK(!a.empty());
  CHECK(a == slurp(s / "b.json"));
  CHECK(nlohmann::json::parse(a).size() > 0);
  REQUIRE(run("synth --config " + (s / "c.json") + " --seed 4 --out " + (s / "c4.json")).status == 0);
  CHECK(slurp(s / "c4.json") != a);
}

TEST_CASE("cli: missing weights exit 3 and bad data exit 2") {
  Scratch s("errors");
  REQUIRE(run("synth --preset validation --seed 1 --out " + (s / "v.json")).status == 0);
  CHECK(run("eval --data " + (s / "v.json") + " --weights " + (s / "missing.bin")).status == 3);
  spit(s / "junk.bin", "not a weights file");
  CHECK(run("eval --data " + (s / "v.json") + " --weights " + (s / "junk.bin")).status == 3);

  spit(s / "bad.json", R"([{"x": 1, "y": 2}])");
  CHECK(run("stats --data " + (s / "bad.json")).status == 2);
  spit(s / "mixed.json",
       R"([{"x":1,"y":2,"date":"2024-01-01T10:00","stress":true},{"x":3,"y":4,"date":"2024-01-01T10:30","stress":false}])");
  CHECK(run("stats --data " + (s / "mixed.json")).status == 2);
  spit(s / "outside.json", R"([{"x":900,"y":2,"date":"2024-01-01T10:00","stress":true}])");
  CHECK(run("stats --data " + (s / "outside.json")).status == 2);
  CHECK(run("stats --data " + (s / "outside.json") + " --floor-width 1000").status == 0);
  CHECK(run("stats --data " + (s / "nope.json")).status == 2);
  spit(s / "bad_config.json", R"({"epochz": 1})");
  CHECK(run("train --data " + (s / "v.json") + " --config " + (s / "bad_config.json") + " --weights " + (s / "w.bin") +
            " --history " + (s / "h.csv"))
            .status == 1);
}

TEST_CASE("cli: stats counts hours and points") {
  Scratch s("stats");
  spit(s / "d.json", R"([{"x":1,"y":2,"date":"2024-01-01T10:00","stress":true},
                         {"x":3,"y":4,"date":"2024-01-01T10:30","stress":true},
                         {"x":5,"y":6,"date":"2024-01-01T12:05","stress":true},
                         {"x":7,"y":8,"date":"2024-01-02T09:59","stress":false}])");
  const auto r = run("stats --data " + (s / "d.json"));
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["hours_wandering"] == 2);
  CHECK(j["hours_normal"] == 1);
  CHECK(j["points_total"] == 4);
  CHECK(j["points_per_interval"]["2024-01-01T10:00"] == 2);
  CHECK(run("stats --data " + (s / "d.json")).out == r.out);
}

TEST_CASE("cli: synth, train, eval and predict end to end on a shrunken model") {
  Scratch s("smoke");
  REQUIRE(run("synth --preset train_test --seed 11 --out " + (s / "train.json")).status == 0);
  REQUIRE(run("synth --preset validation --seed 12 --out " + (s / "val.json")).status == 0);
  spit(s / "train_cfg.json",
       R"({"epochs": 2, "seed": 5, "augment": {"copies_per_image": 1},
           "model": {"input_height": 32, "input_width": 32, "fc1_units": 16, "fc2_units": 8}})");
  const std::string train_cmd = "train --quiet --data " + (s / "train.json") + " --config " + (s / "train_cfg.json") +
                                " --weights " + (s / "w.bin") + " --history " + (s / "h.csv");
  REQUIRE(run(train_cmd).status == 0);
  const auto history = slurp(s / "h.csv");
  CHECK(history.rfind("epoch,train_loss,train_acc,test_loss,test_acc\n", 0) == 0);
  CHECK(std::count(history.begin(), history.end(), '\n') == 3);

  const auto before = slurp(s / "train.json");
  const auto weights = slurp(s / "w.bin");
  REQUIRE(run(train_cmd).status == 0);
  CHECK(slurp(s / "w.bin") == weights);
  CHECK(slurp(s / "h.csv") == history);
  CHECK(slurp(s / "train.json") == before);

  const auto ev = run("eval --data " + (s / "val.json") + " --weights " + (s / "w.bin"));
  REQUIRE(ev.status == 0);
  const auto metrics = nlohmann::json::parse(ev.out);
  for (const char* key : {"tp", "fp", "fn", "tn", "precision", "recall", "f1", "accuracy"})
    CHECK(metrics.contains(key));
  CHECK(metrics["tp"].get<int>() + metrics["fp"].get<int>() + metrics["fn"].get<int>() + metrics["tn"].get<int>() ==
        20);

  const auto pr = run("predict --data " + (s / "val.json") + " --weights " + (s / "w.bin"));
  REQUIRE(pr.status == 0);
  std::istringstream lines(pr.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    ++count;
    CHECK(std::count(line.begin(), line.end(), ',') == 2);
    CHECK((line.ends_with(",wandering") || line.ends_with(",normal")));
  }
  CHECK(count == 20);
}

TEST_CASE("cli: render and export-images write one PNG per trace") {
  Scratch s("render");
  spit(s / "c.json", R"({"seed": 2, "counts": {"Direct": 2, "Lapping": 1}})");
  REQUIRE(run("synth --config " + (s / "c.json") + " --out " + (s / "d.json")).status == 0);
  REQUIRE(run("render --data " + (s / "d.json") + " --out-dir " + (s / "floor")).status == 0);
  REQUIRE(run("export-images --side 64 --data " + (s / "d.json") + " --out-dir " + (s / "net")).status == 0);
  for (const char* sub : {"floor", "net"}) {
    int pngs = 0;
    for (const auto& e : fs::directory_iterator(s.dir / sub)) {
      CHECK(e.path().extension() == ".png");
      const auto bytes = slurp(e.path());
      CHECK(bytes.substr(1, 3) == "PNG");
      ++pngs;
    }
    CHECK(pngs == 3);
  }
}
