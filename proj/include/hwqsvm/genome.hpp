#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hwqsvm/gates.hpp"

namespace hwqsvm {

/// One gene: a gate kind on one or two qubits. Parametric kinds are always
/// data-bound; `feature` pins the data index, and when absent the angle is
/// x_{q mod d} for target qubit q and feature dimension d.
struct GateToken {
  GateKind kind = GateKind::X;
  std::array<int, 2> qubits{0, -1};
  std::optional<int> feature;

  int arity() const noexcept { return gate_arity(kind); }

  friend bool operator==(const GateToken&, const GateToken&) = default;
};

inline constexpr int kMinGenomeLength = 4;
inline constexpr int kMaxGenomeLength = 12;

struct Genome {
  std::vector<GateToken> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  int two_qubit_count() const;
  /// Highest referenced qubit + 1 (0 for an empty genome).
  int qubit_span() const;

  friend bool operator==(const Genome&, const Genome&) = default;
};

/// Text form of one token: `KIND q0[,q1] [f=<feature>]`.
std::string format_token(const GateToken& token);
/// Throws ParseError naming the offending text.
GateToken parse_token(std::string_view text);

/// One token per line. Used as the canonical key for fitness memoization.
std::string format_genome(const Genome& genome);

/// A genome file: tokens plus optional `# qubits=N` / `# fixed_rz=0|1`
/// header directives. Other `#` lines and blank lines are ignored.
struct GenomeFile {
  Genome genome;
  std::optional<int> qubits;
  std::optional<bool> fixed_rz;
};

/// Throws ParseError with the 1-based line number on malformed input.
GenomeFile parse_genome_text(std::string_view text);
GenomeFile load_genome_file(const std::string& path);
std::string format_genome_file(const GenomeFile& file);

}  // namespace hwqsvm
