#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <string_view>

namespace hwqsvm {

using Complex = std::complex<double>;

/// Gate vocabulary. RZ, SX, X and ECR are the native set; the rest form the
/// extended set used by hand-crafted maps and unconstrained search.
enum class GateKind { RZ, SX, X, ECR, RX, RY, H, S, P, CX, CZ };

inline constexpr std::array<GateKind, 11> kAllGateKinds = {
    GateKind::RZ, GateKind::SX, GateKind::X, GateKind::ECR, GateKind::RX, GateKind::RY,
    GateKind::H,  GateKind::S,  GateKind::P, GateKind::CX,  GateKind::CZ};

constexpr bool is_parametric(GateKind k) noexcept {
  return k == GateKind::RZ || k == GateKind::RX || k == GateKind::RY || k == GateKind::P;
}

constexpr int gate_arity(GateKind k) noexcept {
  return (k == GateKind::ECR || k == GateKind::CX || k == GateKind::CZ) ? 2 : 1;
}

std::string_view gate_name(GateKind k) noexcept;
std::optional<GateKind> parse_gate_kind(std::string_view name);

/// Dense 2x2 or 4x4 unitary, row-major.
///
/// Two-qubit matrices use little-endian local ordering: for a gate applied
/// to qubits (a, b) the local basis index is bit(a) + 2 * bit(b). The first
/// listed qubit is the control of ECR and CX.
struct GateMatrix {
  int dim = 2;
  std::array<Complex, 16> m{};

  Complex operator()(int r, int c) const { return m[static_cast<std::size_t>(r * dim + c)]; }
  Complex& operator()(int r, int c) { return m[static_cast<std::size_t>(r * dim + c)]; }

  GateMatrix adjoint() const;
  friend GateMatrix operator*(const GateMatrix& a, const GateMatrix& b);
};

/// Conventional unitary for a gate kind:
///   SX = 1/2 [[1+i, 1-i], [1-i, 1+i]],  RZ(t) = diag(e^{-it/2}, e^{it/2}),
///   P(t) = diag(1, e^{it}),  ECR = (IX - XY)/sqrt(2).
/// Throws InvalidParameterError on a non-finite angle.
GateMatrix gate_matrix(GateKind kind, double angle = 0.0);

/// A gate bound to concrete qubits and (for parametric kinds) a concrete angle.
struct Gate {
  GateKind kind = GateKind::X;
  std::array<int, 2> qubits{0, -1};
  double angle = 0.0;

  int arity() const noexcept { return gate_arity(kind); }

  static Gate one(GateKind k, int q, double angle = 0.0) { return Gate{k, {q, -1}, angle}; }
  static Gate two(GateKind k, int a, int b) { return Gate{k, {a, b}, 0.0}; }

  friend bool operator==(const Gate&, const Gate&) = default;
};

}  // namespace hwqsvm
