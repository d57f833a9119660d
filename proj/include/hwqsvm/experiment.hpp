#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hwqsvm/data.hpp"
#include "hwqsvm/featuremap.hpp"
#include "hwqsvm/genome.hpp"
#include "hwqsvm/hardware.hpp"
#include "hwqsvm/kernel.hpp"
#include "hwqsvm/nas.hpp"
#include "hwqsvm/svm.hpp"
#include "json.hpp"

namespace hwqsvm {

#ifdef HWQSVM_DATA_DIR
inline constexpr const char* kDefaultDataDir = HWQSVM_DATA_DIR;
#else
inline constexpr const char* kDefaultDataDir = "data";
#endif

/// Everything an experiment command needs besides its own arguments.
struct ExperimentConfig {
  std::string data_dir = kDefaultDataDir;
  std::string dataset;  ///< empty: <data_dir>/wdbc.data
  SplitSpec split;
  int cv_folds = 5;
  std::vector<double> C_grid{0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> gamma_grid{0.001, 0.01, 0.1, 1.0, 10.0};
  int handcrafted_qubits = 10;
  int reps = 2;
  double qsvm_C = 1.0;
  std::optional<NoiseModel> noise;  ///< baseline-quantum / eval-genome only
  nlohmann::json nas = nlohmann::json::object();  ///< overrides on top of the variant preset
  int threads = 1;  ///< not part of any report

  std::string dataset_path() const;
  void validate() const;
};

/// Config keys exactly as reports record them (threads excluded).
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);
/// Unknown keys are a ConfigError. Missing keys keep their defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

/// Split, seeded subsets and standardized feature matrices. Features are
/// the top-variance columns ranked on the raw training partition, z-scored
/// with train statistics.
struct PreparedData {
  Dataset full;
  Split split;
  std::vector<std::size_t> features;
  Standardizer scaler;
  Dataset train;
  Dataset test;
};

PreparedData prepare_data(const ExperimentConfig& config, int feature_count);

struct ClassicalResult {
  std::string kernel;  ///< linear or rbf
  GridSearchResult search;
  Metrics test;
};

std::vector<ClassicalResult> run_classical(const ExperimentConfig& config);

struct QuantumResult {
  FeatureMapSpec spec;
  int feature_count = 0;
  SvmModel model;
  Metrics train;
  Metrics test;
  GramDiagnostics train_gram;
};

/// Precomputed-kernel SVM at C = qsvm_C on train, scored on test.
QuantumResult run_quantum(const ExperimentConfig& config, const FeatureMapSpec& spec, const PreparedData& data,
                          const std::optional<NoiseModel>& noise);

/// Hand-crafted map by CLI name at handcrafted_qubits (raw: amplitude
/// encoding of the top_k_features).
FeatureMapSpec handcrafted_spec(const ExperimentConfig& config, const std::string& name);
int map_feature_count(const ExperimentConfig& config, const FeatureMapSpec& spec);

/// Genome map from a genome file; qubits default to the genome's span.
FeatureMapSpec genome_spec(const GenomeFile& file);

struct GenomeEvaluation {
  QuantumResult quantum;
  double native_fraction = 0.0;
  std::vector<Violation> native_violations;  ///< against the native set on chain<n>
  TranspileResult transpile;
};

GenomeEvaluation evaluate_genome(const ExperimentConfig& config, const GenomeFile& file);

struct NasRun {
  NasConfig nas;
  std::vector<std::size_t> subsample;  ///< positions into the training split
  SearchTrace trace;
  QuantumResult best;  ///< best genome retrained on the full training split
  std::vector<Violation> violations;
};

/// Preset `variant` + config.nas overrides, GA seed `seed`.
NasConfig resolve_nas_config(const ExperimentConfig& config, const std::string& variant, std::uint64_t seed);
NasRun run_nas(const ExperimentConfig& config, const NasConfig& nas);

nlohmann::json quantum_result_json(const QuantumResult& r);
nlohmann::json genome_tokens_json(const Genome& g);
nlohmann::json violations_json(const std::vector<Violation>& v);

/// Canonical report text: sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const nlohmann::json& j);

}  // namespace hwqsvm
