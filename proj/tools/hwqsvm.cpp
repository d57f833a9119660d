// hwqsvm command-line front end. Every command writes a canonical JSON
// report (sorted keys) plus CSV mirrors into --out-dir, and a separate
// <stem>.timing.json sidecar so the reports themselves are reproducible.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hwqsvm/error.hpp"
#include "hwqsvm/experiment.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using hwqsvm::Error;
using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out_dir = "results";
  std::string dataset;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

class Writer {
 public:
  explicit Writer(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void text(const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(dir_) / name, std::ios::binary);
    if (!out) throw hwqsvm::DataError("cannot write " + (fs::path(dir_) / name).string());
    out << content;
    artifacts_.push_back(name);
  }
  void report(const std::string& name, json j) {
    j["artifacts"] = artifacts_;
    std::ofstream out(fs::path(dir_) / name, std::ios::binary);
    if (!out) throw hwqsvm::DataError("cannot write " + (fs::path(dir_) / name).string());
    out << hwqsvm::canonical_dump(j);
  }
  void timing(const std::string& stem, const std::string& command, int threads, double seconds) {
    std::ofstream out(fs::path(dir_) / (stem + ".timing.json"), std::ios::binary);
    out << hwqsvm::canonical_dump(json{{"command", command}, {"threads", threads}, {"wall_seconds", seconds}});
  }

 private:
  std::string dir_;
  std::vector<std::string> artifacts_;
};

hwqsvm::ExperimentConfig load_config(const Globals& g) {
  hwqsvm::ExperimentConfig cfg;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw hwqsvm::ConfigError("cannot open config " + g.config_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw hwqsvm::ConfigError("config " + g.config_path + ": " + e.what());
    }
    cfg = hwqsvm::experiment_config_from_json(j, cfg);
  }
  if (g.seed) cfg.split.seed = *g.seed;
  if (!g.dataset.empty()) cfg.dataset = g.dataset;
  if (g.threads < 0) throw hwqsvm::ConfigError("--threads must be >= 0");
  cfg.threads = g.threads;
  cfg.validate();
  return cfg;
}

std::string metrics_csv_cells(const hwqsvm::Metrics& m) {
  return fmt(m.accuracy) + "," + fmt(m.precision) + "," + fmt(m.recall) + "," + fmt(m.f1);
}

json base_report(const std::string& command, const hwqsvm::ExperimentConfig& cfg) {
  return json{{"command", command}, {"config", hwqsvm::experiment_config_to_json(cfg)}};
}

std::string split_manifest(const hwqsvm::PreparedData& d, const hwqsvm::ExperimentConfig& cfg,
                           std::span<const std::size_t> subsample = {}) {
  return hwqsvm::canonical_dump(hwqsvm::split_manifest_json(cfg.split, d.split, subsample, d.features));
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void cmd_baseline_classical(const hwqsvm::ExperimentConfig& cfg, Writer& w) {
  const auto results = hwqsvm::run_classical(cfg);
  const auto data = hwqsvm::prepare_data(cfg, cfg.split.top_k_features);
  w.text("baseline_classical.split.json", split_manifest(data, cfg));
  json models = json::object();
  std::string csv = "model,accuracy,precision,recall,f1,C,gamma\n";
  for (const auto& r : results) {
    json grid = json::array();
    for (const auto& p : r.search.points) grid.push_back({{"C", p.C}, {"gamma", p.gamma}, {"cv_accuracy", p.cv_accuracy}});
    json best{{"C", r.search.best.C}, {"cv_accuracy", r.search.best.cv_accuracy}};
    if (r.kernel == "rbf") best["gamma"] = r.search.best.gamma;
    models[r.kernel] = {{"best", best}, {"grid", grid}, {"test", hwqsvm::metrics_to_json(r.test)},
                        {"train", hwqsvm::metrics_to_json(r.search.train_metrics)}};
    csv += r.kernel + "," + metrics_csv_cells(r.test) + "," + fmt(r.search.best.C) + "," +
           (r.kernel == "rbf" ? fmt(r.search.best.gamma) : std::string{}) + "\n";
  }
  w.text("table1_classical.csv", csv);
  auto report = base_report("baseline-classical", cfg);
  report["features"] = data.features;
  report["models"] = models;
  w.report("baseline_classical.json", report);
}

void cmd_baseline_quantum(const hwqsvm::ExperimentConfig& cfg, const std::string& map, Writer& w) {
  const auto spec = hwqsvm::handcrafted_spec(cfg, map);
  const auto data = hwqsvm::prepare_data(cfg, hwqsvm::map_feature_count(cfg, spec));
  const auto r = hwqsvm::run_quantum(cfg, spec, data, cfg.noise);
  const std::string stem = "baseline_quantum_" + map;
  w.text(stem + ".split.json", split_manifest(data, cfg));
  w.text("table2_" + map + ".csv", "map,accuracy,precision,recall,f1\n" + map + "," + metrics_csv_cells(r.test) + "\n");
  auto report = base_report("baseline-quantum", cfg);
  report["map_name"] = map;
  report["features"] = data.features;
  report["result"] = hwqsvm::quantum_result_json(r);
  w.report(stem + ".json", report);
}

void cmd_nas_run(const hwqsvm::ExperimentConfig& cfg, const std::string& variant, std::uint64_t seed, Writer& w) {
  const auto nas = hwqsvm::resolve_nas_config(cfg, variant, seed);
  const auto run = hwqsvm::run_nas(cfg, nas);
  const std::string stem = "nas_" + variant + "_seed" + std::to_string(seed);
  const auto data = hwqsvm::prepare_data(cfg, nas.n_qubits);
  w.text(stem + ".split.json", split_manifest(data, cfg, run.subsample));
  w.text(stem + ".trace.jsonl", hwqsvm::trace_jsonl(run.trace));
  hwqsvm::GenomeFile gf{run.trace.best_genome, nas.n_qubits, nas.fixed_rz};
  w.text(stem + ".genome", hwqsvm::format_genome_file(gf));
  const auto& best = run.trace.best_genome;
  w.text("table3_" + variant + "_seed" + std::to_string(seed) + ".csv",
         "variant,seed,accuracy,precision,recall,f1,best_fitness,gates,two_qubit_gates\n" + variant + "," +
             std::to_string(seed) + "," + metrics_csv_cells(run.best.test) + "," + fmt(run.trace.best_fitness) + "," +
             std::to_string(best.size()) + "," + std::to_string(best.two_qubit_count()) + "\n");
  std::vector<hwqsvm::GateKind> kinds;
  for (const auto& t : best.tokens) kinds.push_back(t.kind);
  auto report = base_report("nas run", cfg);
  report["variant"] = variant;
  report["nas"] = hwqsvm::nas_config_to_json(nas);
  report["summary"] = hwqsvm::trace_summary_json(run.trace);
  report["best"] = hwqsvm::quantum_result_json(run.best);
  report["best_native_fraction"] = hwqsvm::native_fraction(kinds);
  report["violations"] = hwqsvm::violations_json(run.violations);
  w.report(stem + ".json", report);
}

json transpile_row(const std::string& name, const hwqsvm::TranspileResult& t, std::string& csv) {
  int in_total = 0;
  for (const auto& [k, v] : t.input_counts) in_total += v;
  std::string counts;
  for (const auto& [k, v] : t.input_counts) counts += (counts.empty() ? "" : " ") + k + "=" + std::to_string(v);
  csv += name + "," + std::to_string(in_total) + "," + fmt(t.native_fraction_before) + "," +
         std::to_string(t.gates.size()) + "," + fmt(t.native_fraction_after) + "," + std::to_string(t.depth_before) +
         "," + std::to_string(t.depth_after) + "," + counts + "\n";
  auto j = hwqsvm::transpile_report_json(t);
  j["name"] = name;
  return j;
}

const char* kTranspileCsvHeader =
    "name,gates,native_fraction,transpiled_gates,transpiled_native_fraction,depth,transpiled_depth,counts\n";

void cmd_eval_genome(const hwqsvm::ExperimentConfig& cfg, const std::string& file, Writer& w) {
  const auto gf = hwqsvm::load_genome_file(file);
  const auto ev = hwqsvm::evaluate_genome(cfg, gf);
  const std::string stem = "eval_" + stem_of(file);
  const auto data = hwqsvm::prepare_data(cfg, ev.quantum.spec.n_qubits);
  w.text(stem + ".split.json", split_manifest(data, cfg));
  std::string csv = "genome,accuracy,precision,recall,f1,native_fraction,transpiled_gates\n";
  csv += stem_of(file) + "," + metrics_csv_cells(ev.quantum.test) + "," + fmt(ev.native_fraction) + "," +
         std::to_string(ev.transpile.gates.size()) + "\n";
  w.text(stem + ".csv", csv);
  std::string tcsv = kTranspileCsvHeader;
  auto report = base_report("eval-genome", cfg);
  report["genome_file"] = fs::path(file).filename().string();
  report["result"] = hwqsvm::quantum_result_json(ev.quantum);
  report["native_fraction"] = ev.native_fraction;
  report["native_violations"] = hwqsvm::violations_json(ev.native_violations);
  report["transpile"] = transpile_row(stem_of(file), ev.transpile, tcsv);
  w.report(stem + ".json", report);
}

void cmd_report_hardware(const hwqsvm::ExperimentConfig& cfg, std::vector<std::string> files,
                         std::vector<std::string> maps, Writer& w) {
  if (files.empty() && maps.empty()) {
    for (const char* g : {"hw_fixed_rz", "hw_free", "all_gates"}) files.push_back(cfg.data_dir + "/genomes/" + g + ".genome");
    maps.push_back("zz");
  }
  std::string csv = kTranspileCsvHeader;
  json rows = json::array();
  for (const auto& f : files) {
    const auto gf = hwqsvm::load_genome_file(f);
    const auto spec = hwqsvm::genome_spec(gf);
    const auto sym = hwqsvm::symbolic_from_genome(spec.genome, spec.n_qubits);
    auto row = transpile_row(stem_of(f), hwqsvm::transpile_estimate(sym, hwqsvm::CouplingMap::chain(spec.n_qubits)), csv);
    row["source"] = fs::path(f).filename().string();
    rows.push_back(row);
  }
  for (const auto& m : maps) {
    auto spec = hwqsvm::handcrafted_spec(cfg, m);
    if (spec.kind == hwqsvm::MapKind::RawVector) throw hwqsvm::ConfigError("raw amplitude encoding has no gate circuit to report");
    // gate structure does not depend on the sample values
    const std::vector<double> x(static_cast<std::size_t>(spec.n_qubits), 0.5);
    const auto circuit = std::get<hwqsvm::Circuit>(hwqsvm::build_handcrafted(spec, x));
    const auto sym = hwqsvm::symbolic_from_circuit(circuit);
    auto row = transpile_row(m + std::to_string(spec.n_qubits) + "q_reps" + std::to_string(spec.reps),
                             hwqsvm::transpile_estimate(sym, hwqsvm::CouplingMap::chain(spec.n_qubits)), csv);
    row["source"] = "map:" + m;
    rows.push_back(row);
  }
  w.text("hardware_report.csv", csv);
  auto report = base_report("report-hardware", cfg);
  report["rows"] = rows;
  w.report("hardware_report.json", report);
}

void cmd_kernel_dump(const hwqsvm::ExperimentConfig& cfg, const std::string& map, const std::string& out_csv,
                     Writer& w) {
  hwqsvm::FeatureMapSpec spec;
  if (map.rfind("genome:", 0) == 0) spec = hwqsvm::genome_spec(hwqsvm::load_genome_file(map.substr(7)));
  else if (fs::path(map).extension() == ".genome") spec = hwqsvm::genome_spec(hwqsvm::load_genome_file(map));
  else spec = hwqsvm::handcrafted_spec(cfg, map);
  const int features = hwqsvm::map_feature_count(cfg, spec);
  const auto data = hwqsvm::prepare_data(cfg, features);
  hwqsvm::KernelOptions opts;
  opts.noise = cfg.noise;
  opts.threads = cfg.threads;
  auto gram = hwqsvm::gram_matrix(spec, data.train.X, nullptr, opts);
  gram.row_ids = data.train.ids;
  gram.col_ids = data.train.ids;
  std::ostringstream csv;
  hwqsvm::write_gram_csv(csv, gram);
  const auto name = fs::path(out_csv).filename().string();
  w.text(name, csv.str());
  const auto d = hwqsvm::diagnose(gram);
  auto report = base_report("kernel-dump", cfg);
  report["map"] = map;
  report["features"] = data.features;
  report["diagnostics"] = {{"max_asymmetry", d.max_asymmetry}, {"min_diagonal", d.min_diagonal},
                           {"max_diagonal", d.max_diagonal}, {"min_entry", d.min_entry},
                           {"max_entry", d.max_entry}, {"min_eigenvalue", d.min_eigenvalue}};
  w.report(fs::path(name).stem().string() + ".json", report);
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case Error::Category::Config: return 2;
    case Error::Category::Data: return 3;
    case Error::Category::Runtime: return 4;
  }
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardware-aware quantum kernel SVM experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON experiment config")->envname("HWQSVM_CONFIG");
  app.add_option("--seed", g.seed, "data split seed (default 42)")->envname("HWQSVM_SEED");
  app.add_option("--threads", g.threads, "worker threads, 0 = hardware concurrency")->envname("HWQSVM_THREADS");
  app.add_option("--out-dir", g.out_dir, "report directory")->envname("HWQSVM_OUT_DIR");
  app.add_option("--data", g.dataset, "path to wdbc.data (default: bundled)")->envname("HWQSVM_DATA");

  auto* classical = app.add_subcommand("baseline-classical", "linear and RBF SVM grid searches");
  std::string map_name;
  auto* quantum = app.add_subcommand("baseline-quantum", "QSVM with a hand-crafted feature map");
  quantum->add_option("--map", map_name, "zz, z, pauli, raw or efficient")->required();
  auto* nas = app.add_subcommand("nas", "architecture search");
  nas->require_subcommand(1);
  auto* nas_run = nas->add_subcommand("run", "run one GA search");
  std::string variant;
  std::uint64_t nas_seed = 0;
  nas_run->add_option("--variant", variant, "hw-fixed-rz, hw-free, all-gates, noisy or sparse")->required();
  nas_run->add_option("--seed", nas_seed, "GA seed (default 0)");
  std::string genome_file;
  auto* eval = app.add_subcommand("eval-genome", "train and test a genome feature map");
  eval->add_option("--file", genome_file, "genome file")->required();
  std::vector<std::string> hw_files, hw_maps;
  auto* hardware = app.add_subcommand("report-hardware", "gate counts and native-gate transpilation estimates");
  hardware->add_option("--file", hw_files, "genome files (repeatable)");
  hardware->add_option("--map", hw_maps, "hand-crafted maps (repeatable)");
  std::string dump_map, dump_out;
  auto* dump = app.add_subcommand("kernel-dump", "write the training Gram matrix as CSV");
  dump->add_option("--map", dump_map, "hand-crafted map name or genome file")->required();
  dump->add_option("--out", dump_out, "CSV file name inside --out-dir")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const auto cfg = load_config(g);
    Writer w(g.out_dir);
    const auto start = std::chrono::steady_clock::now();
    std::string command, stem;
    if (*classical) {
      command = "baseline-classical", stem = "baseline_classical";
      cmd_baseline_classical(cfg, w);
    } else if (*quantum) {
      command = "baseline-quantum", stem = "baseline_quantum_" + map_name;
      cmd_baseline_quantum(cfg, map_name, w);
    } else if (*nas_run) {
      command = "nas run", stem = "nas_" + variant + "_seed" + std::to_string(nas_seed);
      cmd_nas_run(cfg, variant, nas_seed, w);
    } else if (*eval) {
      command = "eval-genome", stem = "eval_" + stem_of(genome_file);
      cmd_eval_genome(cfg, genome_file, w);
    } else if (*hardware) {
      command = "report-hardware", stem = "hardware_report";
      cmd_report_hardware(cfg, hw_files, hw_maps, w);
    } else if (*dump) {
      command = "kernel-dump", stem = fs::path(dump_out).stem().string();
      cmd_kernel_dump(cfg, dump_map, dump_out, w);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    w.timing(stem, command, cfg.threads, secs);
    std::cout << command << ": wrote " << (fs::path(g.out_dir) / (stem + ".json")).string() << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
