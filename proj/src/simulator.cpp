#include "hwqsvm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hwqsvm/error.hpp"

namespace hwqsvm {

std::string_view convention_name(DepolarizingConvention c) noexcept {
  return c == DepolarizingConvention::PauliTwirl ? "pauli-twirl" : "complete";
}

std::optional<DepolarizingConvention> parse_convention(std::string_view name) {
  if (name == "pauli-twirl") return DepolarizingConvention::PauliTwirl;
  if (name == "complete") return DepolarizingConvention::Complete;
  return std::nullopt;
}

namespace {

constexpr double kStateTolerance = 1e-10;

// Index with zero bits inserted at positions lo < hi.
inline std::size_t insert_two_zeros(std::size_t k, int lo, int hi) {
  const std::size_t lo_mask = (std::size_t{1} << lo) - 1;
  k = ((k & ~lo_mask) << 1) | (k & lo_mask);
  const std::size_t hi_mask = (std::size_t{1} << hi) - 1;
  return ((k & ~hi_mask) << 1) | (k & hi_mask);
}

// 1-qubit update on a register of `bits` qubits, acting on bit q.
void apply_local_1q(Complex* data, int bits, int q, const GateMatrix& u) {
  const std::size_t size = std::size_t{1} << bits;
  const std::size_t stride = std::size_t{1} << q;
  const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (std::size_t base = 0; base < size; base += 2 * stride) {
    for (std::size_t off = 0; off < stride; ++off) {
      Complex& a0 = data[base + off];
      Complex& a1 = data[base + off + stride];
      const Complex v0 = a0, v1 = a1;
      a0 = u00 * v0 + u01 * v1;
      a1 = u10 * v0 + u11 * v1;
    }
  }
}

// 2-qubit update; local index = bit(qa) + 2 * bit(qb).
void apply_local_2q(Complex* data, int bits, int qa, int qb, const GateMatrix& u) {
  const std::size_t quarter = std::size_t{1} << (bits - 2);
  const std::size_t ma = std::size_t{1} << qa, mb = std::size_t{1} << qb;
  const int lo = std::min(qa, qb), hi = std::max(qa, qb);
  for (std::size_t k = 0; k < quarter; ++k) {
    const std::size_t i0 = insert_two_zeros(k, lo, hi);
    const std::size_t idx[4] = {i0, i0 | ma, i0 | mb, i0 | ma | mb};
    const Complex v[4] = {data[idx[0]], data[idx[1]], data[idx[2]], data[idx[3]]};
    for (int r = 0; r < 4; ++r)
      data[idx[r]] = u(r, 0) * v[0] + u(r, 1) * v[1] + u(r, 2) * v[2] + u(r, 3) * v[3];
  }
}

GateMatrix elementwise_conj(const GateMatrix& u) {
  GateMatrix out = u;
  for (auto& v : out.m) v = std::conj(v);
  return out;
}

void require_mixed(const QuantumState& state, const char* op) {
  if (state.is_pure())
    throw RepresentationError(std::string(op) + " requires a density matrix; promote the state first");
}

// rho -> alpha * rho + beta * Tr_Q(rho) (x) I_Q over the acted qubits Q.
void depolarize(QuantumState& state, std::span<const int> qubits, double alpha, double beta) {
  const int n = state.n_qubits();
  const int bits = 2 * n;
  Complex* rho = state.data().data();
  if (qubits.size() == 1) {
    const int q = qubits[0];
    const std::size_t col = std::size_t{1} << q, row = std::size_t{1} << (q + n);
    const std::size_t quarter = std::size_t{1} << (bits - 2);
    for (std::size_t k = 0; k < quarter; ++k) {
      const std::size_t i0 = insert_two_zeros(k, q, q + n);
      Complex& a = rho[i0];
      Complex& b = rho[i0 | col];
      Complex& c = rho[i0 | row];
      Complex& d = rho[i0 | row | col];
      const Complex t = beta * (a + d);
      a = alpha * a + t;
      d = alpha * d + t;
      b *= alpha;
      c *= alpha;
    }
    return;
  }
  // Two acted qubits: four row bits and four column bits share each block.
  int pos[4] = {qubits[0], qubits[1], qubits[0] + n, qubits[1] + n};
  std::sort(pos, pos + 4);
  const std::size_t blocks = std::size_t{1} << (bits - 4);
  const std::size_t ca = std::size_t{1} << qubits[0], cb = std::size_t{1} << qubits[1];
  const std::size_t ra = ca << n, rb = cb << n;
  const std::size_t rows[4] = {0, ra, rb, ra | rb};
  const std::size_t cols[4] = {0, ca, cb, ca | cb};
  for (std::size_t k = 0; k < blocks; ++k) {
    std::size_t i0 = k;
    for (int p : pos) {
      const std::size_t mask = (std::size_t{1} << p) - 1;
      i0 = ((i0 & ~mask) << 1) | (i0 & mask);
    }
    Complex diag_sum = 0.0;
    for (int v = 0; v < 4; ++v) diag_sum += rho[i0 | rows[v] | cols[v]];
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        Complex& e = rho[i0 | rows[r] | cols[c]];
        e *= alpha;
        if (r == c) e += beta * diag_sum;
      }
  }
}

// Amplitude damping (adjoint=false) or its dual map (adjoint=true) on qubit q.
void amplitude_damp(QuantumState& state, int q, double gamma, bool adjoint) {
  const int n = state.n_qubits();
  Complex* rho = state.data().data();
  const std::size_t col = std::size_t{1} << q, row = std::size_t{1} << (q + n);
  const std::size_t quarter = std::size_t{1} << (2 * n - 2);
  const double keep = std::sqrt(1.0 - gamma);
  for (std::size_t k = 0; k < quarter; ++k) {
    const std::size_t i0 = insert_two_zeros(k, q, q + n);
    Complex& a = rho[i0];
    Complex& d = rho[i0 | row | col];
    if (adjoint) {
      d = (1.0 - gamma) * d + gamma * a;
    } else {
      a += gamma * d;
      d *= (1.0 - gamma);
    }
    rho[i0 | col] *= keep;
    rho[i0 | row] *= keep;
  }
}

void depolarizing_coefficients(const NoiseModel& model, std::size_t k, double& alpha, double& beta) {
  const double p = k == 1 ? model.p1 : model.p2;
  const double dim = k == 1 ? 2.0 : 4.0;
  if (model.convention == DepolarizingConvention::PauliTwirl) {
    // sum over all 4^k Paulis of P rho P = 2^k Tr_Q(rho) (x) I
    const double others = dim * dim - 1.0;
    alpha = 1.0 - p * dim * dim / others;
    beta = p * dim / others;
  } else {
    alpha = 1.0 - p;
    beta = p / dim;
  }
}

void noise_channel(QuantumState& state, const NoiseModel& model, std::span<const int> qubits, bool adjoint) {
  model.validate();
  check_qubits(qubits, state.n_qubits());
  if (qubits.empty() || qubits.size() > 2) throw TopologyError("noise acts on one or two qubits");
  double alpha, beta;
  depolarizing_coefficients(model, qubits.size(), alpha, beta);
  const bool depol = alpha != 1.0 || beta != 0.0;
  // The depolarizing channel is self-dual; only the order flips.
  if (!adjoint && depol) depolarize(state, qubits, alpha, beta);
  if (model.gamma > 0.0) {
    if (adjoint) {
      for (auto it = qubits.rbegin(); it != qubits.rend(); ++it) amplitude_damp(state, *it, model.gamma, true);
    } else {
      for (int q : qubits) amplitude_damp(state, q, model.gamma, false);
    }
  }
  if (adjoint && depol) depolarize(state, qubits, alpha, beta);
}

}  // namespace

void check_qubits(std::span<const int> qubits, int n_qubits) {
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    if (qubits[i] < 0 || qubits[i] >= n_qubits)
      throw TopologyError("qubit index " + std::to_string(qubits[i]) + " out of range for " +
                          std::to_string(n_qubits) + " qubits");
    for (std::size_t j = 0; j < i; ++j)
      if (qubits[j] == qubits[i]) throw TopologyError("duplicate qubit index " + std::to_string(qubits[i]));
  }
}

void NoiseModel::validate() const {
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!in_unit(p1) || !in_unit(p2) || !in_unit(gamma))
    throw InvalidParameterError("noise model parameters must lie in [0, 1]");
}

QuantumState QuantumState::zero(int n_qubits, Representation rep) {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw InvalidParameterError("qubit count must be in [1, " + std::to_string(kMaxQubits) + "]");
  const std::size_t dim = std::size_t{1} << n_qubits;
  std::vector<Complex> data(rep == Representation::Pure ? dim : dim * dim);
  data[0] = 1.0;
  return QuantumState(n_qubits, rep, std::move(data));
}

QuantumState QuantumState::from_amplitudes(std::vector<Complex> amplitudes) {
  const std::size_t size = amplitudes.size();
  if (size < 2 || (size & (size - 1)) != 0)
    throw InvalidParameterError("amplitude count must be a power of two >= 2");
  int n = 0;
  while ((std::size_t{1} << n) < size) ++n;
  if (n > kMaxQubits) throw InvalidParameterError("too many qubits");
  double norm2 = 0.0;
  for (const auto& a : amplitudes) norm2 += std::norm(a);
  if (std::abs(std::sqrt(norm2) - 1.0) > kStateTolerance) throw NormalizationError("amplitudes are not normalized");
  return QuantumState(n, Representation::Pure, std::move(amplitudes));
}

Complex QuantumState::amplitude(std::size_t index) const {
  if (!is_pure()) throw RepresentationError("amplitude() requires a pure state");
  return data_.at(index);
}

Complex QuantumState::element(std::size_t row, std::size_t col) const {
  if (is_pure()) return data_.at(row) * std::conj(data_.at(col));
  return data_.at(row * dim() + col);
}

double QuantumState::probability(std::size_t index) const {
  return is_pure() ? std::norm(data_.at(index)) : data_.at(index * dim() + index).real();
}

QuantumState QuantumState::to_density() const {
  if (!is_pure()) return *this;
  const std::size_t d = dim();
  std::vector<Complex> rho(d * d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) rho[r * d + c] = data_[r] * std::conj(data_[c]);
  return QuantumState(n_qubits_, Representation::Mixed, std::move(rho));
}

double QuantumState::norm() const {
  if (!is_pure()) return std::sqrt(trace());
  double s = 0.0;
  for (const auto& a : data_) s += std::norm(a);
  return std::sqrt(s);
}

double QuantumState::trace() const {
  if (is_pure()) {
    const double n = norm();
    return n * n;
  }
  double t = 0.0;
  const std::size_t d = dim();
  for (std::size_t i = 0; i < d; ++i) t += data_[i * d + i].real();
  return t;
}

double QuantumState::hermiticity_error() const {
  if (is_pure()) return 0.0;
  const std::size_t d = dim();
  double worst = 0.0;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = r; c < d; ++c)
      worst = std::max(worst, std::abs(data_[r * d + c] - std::conj(data_[c * d + r])));
  return worst;
}

void apply_unitary(QuantumState& state, const GateMatrix& u, std::span<const int> qubits) {
  check_qubits(qubits, state.n_qubits());
  const int arity = u.dim == 4 ? 2 : 1;
  if (static_cast<int>(qubits.size()) != arity)
    throw TopologyError("gate acts on " + std::to_string(arity) + " qubit(s), got " + std::to_string(qubits.size()));
  const int n = state.n_qubits();
  Complex* data = state.data().data();
  if (state.is_pure()) {
    if (arity == 1) apply_local_1q(data, n, qubits[0], u);
    else apply_local_2q(data, n, qubits[0], qubits[1], u);
    return;
  }
  // Row index occupies bits n..2n-1 and column index bits 0..n-1.
  const GateMatrix uc = elementwise_conj(u);
  if (arity == 1) {
    apply_local_1q(data, 2 * n, qubits[0] + n, u);
    apply_local_1q(data, 2 * n, qubits[0], uc);
  } else {
    apply_local_2q(data, 2 * n, qubits[0] + n, qubits[1] + n, u);
    apply_local_2q(data, 2 * n, qubits[0], qubits[1], uc);
  }
}

void apply_gate(QuantumState& state, const Gate& gate) {
  apply_unitary(state, gate_matrix(gate.kind, gate.angle),
                std::span<const int>(gate.qubits.data(), static_cast<std::size_t>(gate.arity())));
}

void apply_noise(QuantumState& state, const NoiseModel& model, std::span<const int> qubits) {
  require_mixed(state, "apply_noise");
  noise_channel(state, model, qubits, false);
}

void apply_noise_adjoint(QuantumState& state, const NoiseModel& model, std::span<const int> qubits) {
  require_mixed(state, "apply_noise_adjoint");
  noise_channel(state, model, qubits, true);
}

QuantumState run_circuit(std::span<const Gate> gates, int n_qubits, const std::optional<NoiseModel>& noise) {
  if (noise) noise->validate();
  QuantumState state = QuantumState::zero(n_qubits, noise ? Representation::Mixed : Representation::Pure);
  for (const Gate& g : gates) {
    apply_gate(state, g);
    if (noise) apply_noise(state, *noise, std::span<const int>(g.qubits.data(), static_cast<std::size_t>(g.arity())));
  }
  return state;
}

Complex inner_product(const QuantumState& a, const QuantumState& b) {
  if (!a.is_pure() || !b.is_pure()) throw RepresentationError("inner_product requires pure states");
  if (a.n_qubits() != b.n_qubits()) throw ShapeError("inner_product: qubit counts differ");
  Complex s = 0.0;
  const auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

double trace_product(const QuantumState& a, const QuantumState& b) {
  if (a.is_pure() || b.is_pure()) throw RepresentationError("trace_product requires density matrices");
  if (a.n_qubits() != b.n_qubits()) throw ShapeError("trace_product: qubit counts differ");
  // Tr[a b] = sum_rc a_rc b_cr = sum_rc a_rc conj(b_rc) for Hermitian b
  const auto x = a.data(), y = b.data();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
  return s;
}

}  // namespace hwqsvm
