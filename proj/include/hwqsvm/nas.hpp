#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hwqsvm/data.hpp"
#include "hwqsvm/genome.hpp"
#include "hwqsvm/hardware.hpp"
#include "hwqsvm/random.hpp"
#include "hwqsvm/simulator.hpp"
#include "json.hpp"

namespace hwqsvm {

struct NasConfig {
  std::string variant = "hw-free";
  int population = 8;
  int generations = 4;
  int elitism = 2;
  int tournament_k = 3;
  double p_mut = 0.25;
  double p_insert = 0.1;
  double p_delete = 0.1;
  int min_length = kMinGenomeLength;
  int max_length = kMaxGenomeLength;
  GateVocabulary vocabulary = GateVocabulary::native();
  std::string coupling_name = "chain10";
  CouplingMap coupling = CouplingMap::chain(10);
  int n_qubits = 10;
  bool fixed_rz = false;
  std::optional<NoiseModel> noise;
  double sparsity_lambda = 0.0;
  std::uint64_t seed = 0;
  int subsample = 200;
  int cv_folds = 3;
  double svm_C = 1.0;

  /// Throws ConfigError on any violated bound.
  void validate() const;

  /// hw-fixed-rz, hw-free, all-gates, noisy, sparse.
  static NasConfig preset(const std::string& variant);
  static const std::vector<std::string>& preset_names();
};

nlohmann::json nas_config_to_json(const NasConfig& config);
/// Starts from the preset named by "variant" (or the defaults) and applies
/// the given keys. Unknown keys are a ConfigError. `coupling` may be a
/// bundled name (resolved under data_dir) or {"n_qubits", "edges"}.
NasConfig nas_config_from_json(const nlohmann::json& j, const std::string& data_dir);

/// Fresh token: kind uniform over the vocabulary, one-qubit target uniform,
/// two-qubit pair uniform over the coupling edges with uniform direction.
/// Parametric tokens pin feature q mod feature_dim.
GateToken random_token(const NasConfig& config, RandomStream& rng, int feature_dim);
/// Length uniform in [min_length, max_length].
Genome random_genome(const NasConfig& config, RandomStream& rng, int feature_dim);

/// Index of the fittest of k distinct uniformly drawn candidates; ties go
/// to the lower index.
std::size_t tournament_select(std::span<const double> fitness, int k, RandomStream& rng);

/// Single-point crossover with independent cut points in [1, len - 1];
/// children are clamped into the length bounds by truncation or padding
/// with fresh tokens.
std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, const NasConfig& config, RandomStream& rng,
                                    int feature_dim);

struct MutationInfo {
  int replaced = 0;
  bool inserted = false;
  bool deleted = false;
};

/// Per-token replacement with p_mut, then one insertion with p_insert
/// (below max_length), then one deletion with p_delete (above min_length).
Genome mutate(const Genome& genome, const NasConfig& config, RandomStream& rng, int feature_dim,
              MutationInfo* info = nullptr);

struct FitnessResult {
  double fitness = -std::numeric_limits<double>::infinity();
  double cv_accuracy = 0.0;
  double penalty = 0.0;
  bool failed = false;
  std::string error;
};

/// Mean stratified-CV accuracy at C = svm_C minus sparsity_lambda times the
/// two-qubit token count. Results are memoized by canonical genome text.
/// Failures score -inf and are reported, not thrown.
class FitnessEvaluator {
 public:
  FitnessEvaluator(NasConfig config, Dataset data);

  FitnessResult evaluate(const Genome& genome, int threads = 1);
  /// Memo lookup without evaluating.
  std::optional<FitnessResult> cached(const Genome& genome) const;
  /// Uncached evaluation (for memoization checks).
  FitnessResult compute(const Genome& genome, int threads = 1) const;

  std::size_t evaluations() const { return evaluations_; }
  const Dataset& data() const noexcept { return data_; }
  int feature_dim() const noexcept { return static_cast<int>(data_.feature_count()); }

 private:
  NasConfig config_;
  Dataset data_;
  mutable std::mutex mutex_;
  std::map<std::string, FitnessResult> memo_;
  std::size_t evaluations_ = 0;
};

struct TraceRecord {
  int generation = 0;
  int index = 0;
  Genome genome;
  FitnessResult result;
  std::string origin;  ///< init, elite, offspring
  std::vector<int> parents;  ///< indices into the previous generation
  std::vector<std::string> operators;
  bool memo_hit = false;
};

struct SearchTrace {
  std::vector<TraceRecord> records;
  std::vector<double> best_per_generation;  ///< best fitness so far after each generation
  std::vector<double> generation_best;      ///< best fitness within each population
  Genome best_genome;
  double best_fitness = -std::numeric_limits<double>::infinity();
  int best_generation = 0;
  int best_index = 0;
  int failures = 0;
};

/// Evolves config.population genomes for config.generations rounds and
/// evaluates every population including the last; generations = 0 only
/// scores the initial population. Each stochastic decision draws from its
/// own stream derived from config.seed, so the trace is independent of the
/// thread count.
SearchTrace evolve(const NasConfig& config, const Dataset& data, int threads = 1);

nlohmann::json trace_record_json(const TraceRecord& record);
/// One JSON object per line, in evaluation order.
std::string trace_jsonl(const SearchTrace& trace);
nlohmann::json trace_summary_json(const SearchTrace& trace);

}  // namespace hwqsvm
