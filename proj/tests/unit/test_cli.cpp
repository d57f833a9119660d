#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hwqsvm/error.hpp"
#include "hwqsvm/experiment.hpp"

using namespace hwqsvm;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(HWQSVM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hwqsvm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("experiment config round trip and strict keys") {
    ExperimentConfig c;
    c.split.seed = 9;
    c.noise = NoiseModel{};
    c.nas = {{"population", 4}};
    const auto j = experiment_config_to_json(c);
    CHECK(!j.contains("threads"));
    CHECK(experiment_config_to_json(experiment_config_from_json(j)) == j);
    CHECK_THROWS_AS(experiment_config_from_json({{"seeds", 1}}), ConfigError);
    CHECK_THROWS_AS(experiment_config_from_json({{"cv_folds", 1}}), ConfigError);
    CHECK_THROWS_AS(experiment_config_from_json({{"C_grid", nlohmann::json::array()}}), ConfigError);
  }

  TEST_CASE("map names") {
    const ExperimentConfig c;
    CHECK(handcrafted_spec(c, "zz").n_qubits == c.handcrafted_qubits);
    const auto raw = handcrafted_spec(c, "raw");
    CHECK(raw.n_qubits == 4);
    CHECK(map_feature_count(c, raw) == 10);
    CHECK_THROWS_AS(handcrafted_spec(c, "genome"), ConfigError);
    CHECK_THROWS_AS(handcrafted_spec(c, "zzz"), ConfigError);
  }

  TEST_CASE("nas config resolution") {
    ExperimentConfig c;
    c.nas = {{"population", 4}, {"generations", 1}};
    const auto n = resolve_nas_config(c, "hw-fixed-rz", 3);
    CHECK(n.population == 4);
    CHECK(n.seed == 3);
    CHECK(n.fixed_rz);
    CHECK(n.subsample == c.split.nas_subsample);
    CHECK_THROWS_AS(resolve_nas_config(c, "nope", 0), ConfigError);
  }

  TEST_CASE("exit codes") {
    CHECK(run("--help") == 0);
    CHECK(run("no-such-command") == 2);
    const auto dir = scratch("codes");
    CHECK(run("--out-dir " + dir.string() + " baseline-quantum --map nope") == 2);
    CHECK(run("--out-dir " + dir.string() + " --data /nonexistent.data baseline-quantum --map z") == 3);
    std::ofstream(dir / "bad.json") << "{\"cv_folds\": ";
    CHECK(run("--config " + (dir / "bad.json").string() + " --out-dir " + dir.string() + " baseline-classical") == 2);
    CHECK(run("--out-dir " + dir.string() + " eval-genome --file /nonexistent.genome") == 3);
  }

  TEST_CASE("eval-genome writes a report and a timing file") {
    const auto dir = scratch("eval");
    const std::string genome = std::string(HWQSVM_DATA_DIR) + "/genomes/hw_fixed_rz.genome";
    REQUIRE(run("--out-dir " + dir.string() + " eval-genome --file " + genome) == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "eval_hw_fixed_rz.json"));
    CHECK(report.at("native_fraction") == 1.0);
    CHECK(report.at("native_violations").empty());
    CHECK(fs::exists(dir / "eval_hw_fixed_rz.csv"));
    const auto timing = nlohmann::json::parse(slurp(dir / "eval_hw_fixed_rz.timing.json"));
    CHECK(timing.at("wall_seconds").get<double>() >= 0.0);
    const auto first = slurp(dir / "eval_hw_fixed_rz.json");
    REQUIRE(run("--out-dir " + dir.string() + " eval-genome --file " + genome) == 0);
    CHECK(slurp(dir / "eval_hw_fixed_rz.json") == first);
  }

  TEST_CASE("kernel-dump and report-hardware") {
    const auto dir = scratch("dump");
    REQUIRE(run("--out-dir " + dir.string() + " kernel-dump --map z --out z.csv") == 0);
    std::ifstream csv(dir / "z.csv");
    const auto gram = read_gram_csv(csv);
    CHECK(gram.values.rows() == 455);
    CHECK(gram.is_square());
    REQUIRE(run("--out-dir " + dir.string() + " report-hardware") == 0);
    const auto hw = nlohmann::json::parse(slurp(dir / "hardware_report.json"));
    REQUIRE(hw.at("rows").size() == 4);
    bool zz_below_one = false;
    for (const auto& r : hw.at("rows")) {
      CHECK(r.at("native_fraction_after") == 1.0);
      if (r.at("source") == "map:zz") zz_below_one = r.at("native_fraction_before").get<double>() < 1.0;
    }
    CHECK(zz_below_one);
  }
}
