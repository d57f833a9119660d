#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hwqsvm/featuremap.hpp"
#include "hwqsvm/genome.hpp"
#include "json.hpp"

namespace hwqsvm {

/// Undirected qubit connectivity graph.
class CouplingMap {
 public:
  CouplingMap() = default;
  /// Throws TopologyError on self-loops or indices outside [0, n).
  CouplingMap(int n_qubits, std::vector<std::pair<int, int>> edges);

  static CouplingMap chain(int n_qubits);
  /// `n=<qubits>` then one `i j` edge per line; `#` starts a comment.
  static CouplingMap parse(const std::string& text);
  static CouplingMap load(const std::string& path);
  /// chain6, chain10 or heavyhex27 from the bundled data directory.
  static CouplingMap bundled(const std::string& name, const std::string& data_dir);

  int n_qubits() const noexcept { return n_qubits_; }
  /// Edges normalized to (min, max) and sorted.
  const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }
  bool connected(int a, int b) const;

  std::string to_text() const;

 private:
  int n_qubits_ = 0;
  std::vector<std::pair<int, int>> edges_;
};

struct GateVocabulary {
  std::string name;
  std::vector<GateKind> kinds;

  bool contains(GateKind k) const;
  bool has_two_qubit_kinds() const;

  /// {RZ, SX, X, ECR}
  static GateVocabulary native();
  /// native plus {RX, RY, H, S, CZ, CX}
  static GateVocabulary extended();
  static GateVocabulary by_name(const std::string& name);
};

bool is_native(GateKind k) noexcept;

struct Violation {
  enum class Type { Vocabulary, Connectivity, QubitRange };
  Type type = Type::Vocabulary;
  std::size_t position = 0;
  std::string message;
};

/// Every token outside the vocabulary, every qubit outside the map, and
/// every two-qubit token on an uncoupled pair. Empty means valid.
std::vector<Violation> validate_genome(const Genome& genome, const GateVocabulary& vocab, const CouplingMap& map);

/// Affine angle: constant + sum of coefficient * x_feature.
struct Angle {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;

  static Angle fixed(double v) { return Angle{v, {}}; }
  static Angle feature(int f) { return Angle{0.0, {{f, 1.0}}}; }
  bool is_constant() const noexcept { return terms.empty(); }
  double evaluate(std::span<const double> x) const;
  Angle operator+(const Angle& other) const;
  Angle plus(double v) const;

  friend bool operator==(const Angle&, const Angle&) = default;
};

/// A gate with a possibly data-dependent angle.
struct SymbolicGate {
  GateKind kind = GateKind::X;
  std::array<int, 2> qubits{0, -1};
  Angle angle;

  int arity() const noexcept { return gate_arity(kind); }
  friend bool operator==(const SymbolicGate&, const SymbolicGate&) = default;
};

/// Genome tokens with their data bindings resolved for feature dimension d
/// (the fixed RZ layer is not included).
std::vector<SymbolicGate> symbolic_from_genome(const Genome& genome, int feature_dim);
std::vector<SymbolicGate> symbolic_from_circuit(const Circuit& circuit);
Circuit bind_symbolic(std::span<const SymbolicGate> gates, std::span<const double> x);

double native_fraction(std::span<const GateKind> kinds);
double native_fraction(std::span<const SymbolicGate> gates);

/// Native rewrite of one non-native gate (the gate itself if native).
/// CX -> X(c), ECR(c,t), RZ(pi/2)(c), SX(t); H -> RZ(pi/2) SX RZ(pi/2);
/// S -> RZ(pi/2); P -> RZ; RX/RY -> RZ SX RZ SX RZ; CZ -> H(t) CX H(t),
/// rewritten recursively. Gates are in time order.
std::vector<SymbolicGate> rewrite_native(const SymbolicGate& gate);

struct TranspileResult {
  std::vector<SymbolicGate> gates;
  std::map<std::string, int> input_counts;
  std::map<std::string, int> output_counts;
  double native_fraction_before = 0.0;
  double native_fraction_after = 0.0;
  int depth_before = 0;
  int depth_after = 0;
};

/// Gate-level decomposition into the native set. Native input gates pass
/// through untouched; RZs emitted by rewrites merge with an adjacent RZ on
/// the same qubit. Throws TopologyError for uncoupled two-qubit pairs.
TranspileResult transpile_estimate(std::span<const SymbolicGate> gates, const CouplingMap& map);

int circuit_depth(std::span<const SymbolicGate> gates);
std::map<std::string, int> gate_counts(std::span<const SymbolicGate> gates);

nlohmann::json transpile_report_json(const TranspileResult& result);

}  // namespace hwqsvm
