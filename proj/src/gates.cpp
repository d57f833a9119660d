#include "hwqsvm/gates.hpp"

#include <cmath>
#include <numbers>

#include "hwqsvm/error.hpp"

namespace hwqsvm {

std::string_view gate_name(GateKind k) noexcept {
  switch (k) {
    case GateKind::RZ: return "RZ";
    case GateKind::SX: return "SX";
    case GateKind::X: return "X";
    case GateKind::ECR: return "ECR";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::P: return "P";
    case GateKind::CX: return "CX";
    case GateKind::CZ: return "CZ";
  }
  return "?";
}

std::optional<GateKind> parse_gate_kind(std::string_view name) {
  for (GateKind k : kAllGateKinds)
    if (gate_name(k) == name) return k;
  return std::nullopt;
}

GateMatrix GateMatrix::adjoint() const {
  GateMatrix out;
  out.dim = dim;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) out(r, c) = std::conj((*this)(c, r));
  return out;
}

GateMatrix operator*(const GateMatrix& a, const GateMatrix& b) {
  GateMatrix out;
  out.dim = a.dim;
  for (int r = 0; r < a.dim; ++r)
    for (int c = 0; c < a.dim; ++c) {
      Complex s = 0.0;
      for (int k = 0; k < a.dim; ++k) s += a(r, k) * b(k, c);
      out(r, c) = s;
    }
  return out;
}

namespace {

GateMatrix one_qubit(Complex a, Complex b, Complex c, Complex d) {
  GateMatrix g;
  g.dim = 2;
  g.m[0] = a;
  g.m[1] = b;
  g.m[2] = c;
  g.m[3] = d;
  return g;
}

GateMatrix two_qubit(std::initializer_list<Complex> values) {
  GateMatrix g;
  g.dim = 4;
  std::size_t i = 0;
  for (Complex v : values) g.m[i++] = v;
  return g;
}

}  // namespace

GateMatrix gate_matrix(GateKind kind, double angle) {
  if (is_parametric(kind) && !std::isfinite(angle))
    throw InvalidParameterError(std::string("non-finite angle for gate ") + std::string(gate_name(kind)));

  using std::numbers::sqrt2;
  const Complex i{0.0, 1.0};
  const double h = angle / 2.0;
  switch (kind) {
    case GateKind::RZ: return one_qubit(std::polar(1.0, -h), 0.0, 0.0, std::polar(1.0, h));
    case GateKind::P: return one_qubit(1.0, 0.0, 0.0, std::polar(1.0, angle));
    case GateKind::RX: return one_qubit(std::cos(h), -i * std::sin(h), -i * std::sin(h), std::cos(h));
    case GateKind::RY: return one_qubit(std::cos(h), -std::sin(h), std::sin(h), std::cos(h));
    case GateKind::SX: return one_qubit({0.5, 0.5}, {0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5});
    case GateKind::X: return one_qubit(0.0, 1.0, 1.0, 0.0);
    case GateKind::H: return one_qubit(1.0 / sqrt2, 1.0 / sqrt2, 1.0 / sqrt2, -1.0 / sqrt2);
    case GateKind::S: return one_qubit(1.0, 0.0, 0.0, i);
    case GateKind::ECR: {
      const double s = 1.0 / sqrt2;
      return two_qubit({0.0, s, 0.0, i * s,
                        s, 0.0, -i * s, 0.0,
                        0.0, i * s, 0.0, s,
                        -i * s, 0.0, s, 0.0});
    }
    case GateKind::CX:
      // control = local bit 0, target = local bit 1
      return two_qubit({1, 0, 0, 0,
                        0, 0, 0, 1,
                        0, 0, 1, 0,
                        0, 1, 0, 0});
    case GateKind::CZ:
      return two_qubit({1, 0, 0, 0,
                        0, 1, 0, 0,
                        0, 0, 1, 0,
                        0, 0, 0, -1});
  }
  throw InvalidParameterError("unknown gate kind");
}

}  // namespace hwqsvm
