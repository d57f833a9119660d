#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hwqsvm/gates.hpp"

namespace hwqsvm {

inline constexpr int kMaxQubits = 12;

enum class Representation { Pure, Mixed };

/// Statevector or density matrix over n qubits, little-endian: qubit q is
/// bit q of the basis-state index. A density matrix is stored row-major,
/// element (r, c) at r * 2^n + c.
class QuantumState {
 public:
  /// |0...0>, as a vector or as its density matrix.
  static QuantumState zero(int n_qubits, Representation rep = Representation::Pure);

  /// Pure state from amplitudes; the length must be 2^n and the norm 1.
  static QuantumState from_amplitudes(std::vector<Complex> amplitudes);

  int n_qubits() const noexcept { return n_qubits_; }
  std::size_t dim() const noexcept { return std::size_t{1} << n_qubits_; }
  Representation representation() const noexcept { return rep_; }
  bool is_pure() const noexcept { return rep_ == Representation::Pure; }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  Complex amplitude(std::size_t index) const;
  /// Density-matrix element; for a pure state the outer-product entry.
  Complex element(std::size_t row, std::size_t col) const;
  double probability(std::size_t index) const;

  /// Density-matrix copy of this state (|psi><psi| for a pure state).
  QuantumState to_density() const;

  double norm() const;
  double trace() const;
  /// Largest |rho - rho^dagger| entry; 0 for pure states.
  double hermiticity_error() const;

 private:
  QuantumState(int n, Representation rep, std::vector<Complex> data)
      : n_qubits_(n), rep_(rep), data_(std::move(data)) {}

  int n_qubits_ = 0;
  Representation rep_ = Representation::Pure;
  std::vector<Complex> data_;
};

/// Depolarizing parameterization. PauliTwirl spreads p over the 4^k - 1
/// non-identity Paulis; Complete replaces the state by I/2^k with
/// probability p.
enum class DepolarizingConvention { PauliTwirl, Complete };

/// "pauli-twirl" or "complete".
std::string_view convention_name(DepolarizingConvention c) noexcept;
std::optional<DepolarizingConvention> parse_convention(std::string_view name);

struct NoiseModel {
  double p1 = 0.01;    ///< single-qubit depolarizing probability
  double p2 = 0.02;    ///< two-qubit depolarizing probability
  double gamma = 0.005;  ///< amplitude damping per acted qubit
  DepolarizingConvention convention = DepolarizingConvention::PauliTwirl;

  /// Throws InvalidParameterError unless all parameters are in [0, 1].
  void validate() const;
  bool is_zero() const noexcept { return p1 == 0.0 && p2 == 0.0 && gamma == 0.0; }

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

/// Applies a 2x2 or 4x4 unitary to the listed qubits without materializing
/// the full operator. Pure: U|psi>. Mixed: U rho U^dagger.
void apply_unitary(QuantumState& state, const GateMatrix& u, std::span<const int> qubits);

void apply_gate(QuantumState& state, const Gate& gate);

/// Depolarizing over the acted qubits (p1 for one qubit, p2 for two)
/// followed by amplitude damping on each acted qubit. Mixed states only.
void apply_noise(QuantumState& state, const NoiseModel& model, std::span<const int> qubits);

/// Heisenberg-picture (adjoint) form of apply_noise: the dual channel
/// applied in reverse order, so Tr[apply_noise(rho) sigma] equals
/// Tr[rho apply_noise_adjoint(sigma)].
void apply_noise_adjoint(QuantumState& state, const NoiseModel& model, std::span<const int> qubits);

/// Evolves |0...0> through the gates. With a noise model the state is a
/// density matrix and apply_noise follows every gate on its qubits.
QuantumState run_circuit(std::span<const Gate> gates, int n_qubits,
                         const std::optional<NoiseModel>& noise = std::nullopt);

/// <a|b> for two pure states.
Complex inner_product(const QuantumState& a, const QuantumState& b);

/// Re Tr[a b] for two density matrices.
double trace_product(const QuantumState& a, const QuantumState& b);

/// Throws TopologyError unless each index is < n_qubits and all are distinct.
void check_qubits(std::span<const int> qubits, int n_qubits);

}  // namespace hwqsvm
