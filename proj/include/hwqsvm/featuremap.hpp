#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "hwqsvm/gates.hpp"
#include "hwqsvm/genome.hpp"

namespace hwqsvm {

using Circuit = std::vector<Gate>;

enum class MapKind { Genome, Z, ZZ, Pauli, RawVector, EfficientLike };

/// CLI names: genome, z, zz, pauli, raw, efficient.
std::string_view map_kind_name(MapKind kind) noexcept;
std::optional<MapKind> parse_map_kind(std::string_view name);

struct FeatureMapSpec {
  MapKind kind = MapKind::Z;
  int n_qubits = 6;
  int reps = 2;          ///< hand-crafted maps only
  bool fixed_rz = false;  ///< genome maps only
  Genome genome;

  /// Throws InvalidParameterError on n_qubits < 1 or reps < 1.
  void validate() const;
};

/// Amplitude encoding: x zero-padded to 2^n and normalized.
struct AmplitudeEncoding {
  int n_qubits = 1;
  std::vector<double> amplitudes;
};

using PreparedMap = std::variant<Circuit, AmplitudeEncoding>;

/// Qubits needed to amplitude-encode d features.
int amplitude_qubits(std::size_t feature_count);

/// Genome -> concrete circuit for one sample. With fixed_rz, RZ(x_q) is
/// prepended on every qubit q < n_qubits. Genome rotations take x_f for
/// their pinned feature f, or x_{q mod dim(x)} when unpinned.
Circuit bind_genome(const Genome& genome, std::span<const double> x, bool fixed_rz, int n_qubits);

/// Z, ZZ, Pauli, EfficientLike (linear entanglement) and RawVector.
PreparedMap build_handcrafted(const FeatureMapSpec& spec, std::span<const double> x);

/// Dispatches on spec.kind.
PreparedMap prepare_map(const FeatureMapSpec& spec, std::span<const double> x);

/// Register size the map acts on for d-dimensional inputs.
int map_qubits(const FeatureMapSpec& spec, std::size_t feature_count);

}  // namespace hwqsvm
