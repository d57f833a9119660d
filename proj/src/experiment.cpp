#include "hwqsvm/experiment.hpp"

#include <numeric>

#include "hwqsvm/error.hpp"

namespace hwqsvm {

std::string ExperimentConfig::dataset_path() const { return dataset.empty() ? data_dir + "/wdbc.data" : dataset; }

void ExperimentConfig::validate() const {
  split.validate();
  if (cv_folds < 2) throw ConfigError("cv_folds must be at least 2");
  if (C_grid.empty() || gamma_grid.empty()) throw ConfigError("empty hyperparameter grid");
  for (double c : C_grid)
    if (!(c > 0.0)) throw ConfigError("C_grid values must be positive");
  for (double g : gamma_grid)
    if (!(g > 0.0)) throw ConfigError("gamma_grid values must be positive");
  if (handcrafted_qubits < 1 || handcrafted_qubits > kMaxQubits) throw ConfigError("handcrafted_qubits out of range");
  if (reps < 1) throw ConfigError("reps must be at least 1");
  if (!(qsvm_C > 0.0)) throw ConfigError("qsvm_C must be positive");
  if (noise) {
    try {
      noise->validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (!nas.is_object()) throw ConfigError("nas overrides must be a JSON object");
}

namespace {

nlohmann::json noise_json(const std::optional<NoiseModel>& noise) {
  if (!noise) return nullptr;
  return {{"p1", noise->p1}, {"p2", noise->p2}, {"gamma", noise->gamma},
          {"convention", std::string(convention_name(noise->convention))}};
}

NoiseModel noise_from_json(const nlohmann::json& j) {
  NoiseModel m;
  for (const auto& [k, v] : j.items()) {
    if (k == "p1") m.p1 = v.get<double>();
    else if (k == "p2") m.p2 = v.get<double>();
    else if (k == "gamma") m.gamma = v.get<double>();
    else if (k == "convention") {
      auto c = parse_convention(v.get<std::string>());
      if (!c) throw ConfigError("unknown depolarizing convention '" + v.get<std::string>() + "'");
      m.convention = *c;
    } else throw ConfigError("unknown noise key '" + k + "'");
  }
  return m;
}

}  // namespace

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  return nlohmann::json{{"dataset", c.dataset.empty() ? std::string("bundled:wdbc.data") : c.dataset},
                        {"seed", c.split.seed},
                        {"train_fraction", c.split.train_fraction},
                        {"stratified", c.split.stratified},
                        {"nas_subsample", c.split.nas_subsample},
                        {"top_k_features", c.split.top_k_features},
                        {"cv_folds", c.cv_folds},
                        {"C_grid", c.C_grid},
                        {"gamma_grid", c.gamma_grid},
                        {"handcrafted_qubits", c.handcrafted_qubits},
                        {"reps", c.reps},
                        {"qsvm_C", c.qsvm_C},
                        {"noise", noise_json(c.noise)},
                        {"nas", c.nas}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "dataset") {
        const auto s = v.get<std::string>();
        c.dataset = s == "bundled:wdbc.data" ? std::string{} : s;
      } else if (k == "seed") c.split.seed = v.get<std::uint64_t>();
      else if (k == "train_fraction") c.split.train_fraction = v.get<double>();
      else if (k == "stratified") c.split.stratified = v.get<bool>();
      else if (k == "nas_subsample") c.split.nas_subsample = v.get<int>();
      else if (k == "top_k_features") c.split.top_k_features = v.get<int>();
      else if (k == "cv_folds") c.cv_folds = v.get<int>();
      else if (k == "C_grid") c.C_grid = v.get<std::vector<double>>();
      else if (k == "gamma_grid") c.gamma_grid = v.get<std::vector<double>>();
      else if (k == "handcrafted_qubits") c.handcrafted_qubits = v.get<int>();
      else if (k == "reps") c.reps = v.get<int>();
      else if (k == "qsvm_C") c.qsvm_C = v.get<double>();
      else if (k == "noise") c.noise = v.is_null() ? std::nullopt : std::optional<NoiseModel>(noise_from_json(v));
      else if (k == "nas") c.nas = v;
      else throw ConfigError("unknown config key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

PreparedData prepare_data(const ExperimentConfig& config, int feature_count) {
  PreparedData d;
  d.full = load_wdbc(config.dataset_path());
  if (feature_count < 1 || static_cast<std::size_t>(feature_count) > d.full.feature_count())
    throw ConfigError("feature count " + std::to_string(feature_count) + " outside [1, " +
                      std::to_string(d.full.feature_count()) + "]");
  d.split = stratified_split(d.full.y, config.split);
  const Dataset train_raw = d.full.subset(d.split.train);
  d.features = select_top_variance(train_raw.X, feature_count);
  const Dataset train_sel = train_raw.with_features(d.features);
  const Dataset test_sel = d.full.subset(d.split.test).with_features(d.features);
  d.scaler = Standardizer::fit(train_sel.X);
  d.train = train_sel;
  d.train.X = d.scaler.apply(train_sel.X);
  d.test = test_sel;
  d.test.X = d.scaler.apply(test_sel.X);
  return d;
}

std::vector<ClassicalResult> run_classical(const ExperimentConfig& config) {
  const auto data = prepare_data(config, config.split.top_k_features);
  GridSearchOptions opts;
  opts.folds = config.cv_folds;
  opts.seed = config.split.seed;
  opts.threads = config.threads;
  std::vector<ClassicalResult> out;
  for (auto kind : {ClassicalKernel::Kind::Linear, ClassicalKernel::Kind::Rbf}) {
    ClassicalResult r;
    r.kernel = kind == ClassicalKernel::Kind::Linear ? "linear" : "rbf";
    r.search = grid_search(data.train.X, data.train.y, kind, config.C_grid, config.gamma_grid, opts);
    const Matrix K_test = classical_kernel(data.test.X, data.train.X, ClassicalKernel{kind, kind == ClassicalKernel::Kind::Rbf ? r.search.best.gamma : 1.0});
    r.test = compute_metrics(data.test.y, predict(r.search.model, K_test));
    out.push_back(std::move(r));
  }
  return out;
}

QuantumResult run_quantum(const ExperimentConfig& config, const FeatureMapSpec& spec, const PreparedData& data,
                          const std::optional<NoiseModel>& noise) {
  QuantumResult r;
  r.spec = spec;
  r.feature_count = static_cast<int>(data.train.feature_count());
  KernelOptions opts;
  opts.noise = noise;
  opts.threads = config.threads;
  const auto K_train = gram_matrix(spec, data.train.X, nullptr, opts);
  const auto K_test = gram_matrix(spec, data.test.X, &data.train.X, opts);
  SvmOptions svm;
  svm.C = config.qsvm_C;
  r.model = train_precomputed(K_train.values, data.train.y, svm);
  r.train = compute_metrics(data.train.y, predict(r.model, K_train.values));
  r.test = compute_metrics(data.test.y, predict(r.model, K_test.values));
  r.train_gram = diagnose(K_train);
  return r;
}

FeatureMapSpec handcrafted_spec(const ExperimentConfig& config, const std::string& name) {
  const auto kind = parse_map_kind(name);
  if (!kind || *kind == MapKind::Genome)
    throw ConfigError("unknown hand-crafted map '" + name + "' (expected zz, z, pauli, raw or efficient)");
  FeatureMapSpec spec;
  spec.kind = *kind;
  spec.n_qubits = *kind == MapKind::RawVector ? amplitude_qubits(static_cast<std::size_t>(config.split.top_k_features))
                                              : config.handcrafted_qubits;
  spec.reps = config.reps;
  spec.validate();
  return spec;
}

int map_feature_count(const ExperimentConfig& config, const FeatureMapSpec& spec) {
  return spec.kind == MapKind::RawVector ? config.split.top_k_features : spec.n_qubits;
}

FeatureMapSpec genome_spec(const GenomeFile& file) {
  FeatureMapSpec spec;
  spec.kind = MapKind::Genome;
  spec.genome = file.genome;
  spec.n_qubits = file.qubits.value_or(file.genome.qubit_span());
  spec.fixed_rz = file.fixed_rz.value_or(false);
  if (spec.genome.qubit_span() > spec.n_qubits)
    throw TopologyError("genome uses qubit " + std::to_string(spec.genome.qubit_span() - 1) + " but declares " +
                        std::to_string(spec.n_qubits) + " qubits");
  spec.validate();
  return spec;
}

GenomeEvaluation evaluate_genome(const ExperimentConfig& config, const GenomeFile& file) {
  GenomeEvaluation ev;
  const auto spec = genome_spec(file);
  const auto data = prepare_data(config, spec.n_qubits);
  ev.quantum = run_quantum(config, spec, data, config.noise);
  std::vector<GateKind> kinds;
  for (const auto& t : spec.genome.tokens) kinds.push_back(t.kind);
  ev.native_fraction = native_fraction(kinds);
  const auto chain = CouplingMap::chain(spec.n_qubits);
  ev.native_violations = validate_genome(spec.genome, GateVocabulary::native(), chain);
  const auto symbolic = symbolic_from_genome(spec.genome, spec.n_qubits);
  ev.transpile = transpile_estimate(symbolic, chain);
  return ev;
}

NasConfig resolve_nas_config(const ExperimentConfig& config, const std::string& variant, std::uint64_t seed) {
  nlohmann::json j = config.nas;
  j["variant"] = variant;
  j["seed"] = seed;
  if (!j.contains("subsample")) j["subsample"] = config.split.nas_subsample;
  return nas_config_from_json(j, config.data_dir);
}

NasRun run_nas(const ExperimentConfig& config, const NasConfig& nas) {
  NasRun run;
  run.nas = nas;
  const auto data = prepare_data(config, nas.n_qubits);
  std::vector<std::size_t> rows(data.train.size());
  std::iota(rows.begin(), rows.end(), 0);
  run.subsample = nas_subsample(data.train.y, rows, nas.subsample, nas.seed);
  run.trace = evolve(nas, data.train.subset(run.subsample), config.threads);
  for (const auto& rec : run.trace.records) {
    auto v = validate_genome(rec.genome, nas.vocabulary, nas.coupling);
    run.violations.insert(run.violations.end(), v.begin(), v.end());
  }
  FeatureMapSpec spec;
  spec.kind = MapKind::Genome;
  spec.genome = run.trace.best_genome;
  spec.n_qubits = nas.n_qubits;
  spec.fixed_rz = nas.fixed_rz;
  run.best = run_quantum(config, spec, data, nas.noise);
  return run;
}

nlohmann::json genome_tokens_json(const Genome& g) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : g.tokens) out.push_back(format_token(t));
  return out;
}

nlohmann::json quantum_result_json(const QuantumResult& r) {
  nlohmann::json map{{"kind", std::string(map_kind_name(r.spec.kind))},
                     {"n_qubits", map_qubits(r.spec, static_cast<std::size_t>(r.feature_count))},
                     {"features", r.feature_count}};
  if (r.spec.kind == MapKind::Genome) {
    map["genome"] = genome_tokens_json(r.spec.genome);
    map["fixed_rz"] = r.spec.fixed_rz;
  } else if (r.spec.kind != MapKind::RawVector) {
    map["reps"] = r.spec.reps;
  }
  const auto& g = r.train_gram;
  return nlohmann::json{{"map", map},
                        {"test", metrics_to_json(r.test)},
                        {"train", metrics_to_json(r.train)},
                        {"support_vectors", r.model.support.size()},
                        {"svm_converged", r.model.converged},
                        {"non_psd_warning", r.model.non_psd_warning},
                        {"train_gram",
                         {{"max_asymmetry", g.max_asymmetry},
                          {"min_diagonal", g.min_diagonal},
                          {"max_diagonal", g.max_diagonal},
                          {"min_entry", g.min_entry},
                          {"max_entry", g.max_entry},
                          {"min_eigenvalue", g.min_eigenvalue}}}};
}

nlohmann::json violations_json(const std::vector<Violation>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& x : v) {
    const char* type = x.type == Violation::Type::Vocabulary ? "vocabulary"
                       : x.type == Violation::Type::Connectivity ? "connectivity"
                                                                 : "qubit_range";
    out.push_back({{"type", type}, {"position", x.position}, {"message", x.message}});
  }
  return out;
}

std::string canonical_dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace hwqsvm
