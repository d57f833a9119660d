#include "hwqsvm/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "hwqsvm/error.hpp"
#include "hwqsvm/parallel.hpp"

namespace hwqsvm {

namespace {

QuantumState amplitude_state(const AmplitudeEncoding& enc) {
  std::vector<Complex> amps(enc.amplitudes.begin(), enc.amplitudes.end());
  return QuantumState::from_amplitudes(std::move(amps));
}

int circuit_qubits(const FeatureMapSpec& spec) { return spec.n_qubits; }

std::span<const int> gate_qubits(const Gate& g) {
  return {g.qubits.data(), static_cast<std::size_t>(g.arity())};
}

void check_same_dimension(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw BindingError("kernel inputs differ in dimension: " + std::to_string(x.size()) + " vs " +
                       std::to_string(y.size()));
}

}  // namespace

QuantumState encode_state(const FeatureMapSpec& spec, std::span<const double> x) {
  PreparedMap prepared = prepare_map(spec, x);
  if (auto* enc = std::get_if<AmplitudeEncoding>(&prepared)) return amplitude_state(*enc);
  return run_circuit(std::get<Circuit>(prepared), circuit_qubits(spec));
}

QuantumState encode_density(const FeatureMapSpec& spec, std::span<const double> x, const NoiseModel& noise) {
  PreparedMap prepared = prepare_map(spec, x);
  if (auto* enc = std::get_if<AmplitudeEncoding>(&prepared)) return amplitude_state(*enc).to_density();
  return run_circuit(std::get<Circuit>(prepared), circuit_qubits(spec), noise);
}

QuantumState uncompute_observable(const FeatureMapSpec& spec, std::span<const double> y, const NoiseModel& noise) {
  noise.validate();
  PreparedMap prepared = prepare_map(spec, y);
  if (auto* enc = std::get_if<AmplitudeEncoding>(&prepared)) return amplitude_state(*enc).to_density();
  // Uncompute applies g_L^dag, N, ..., g_1^dag, N. Its dual runs backwards:
  // for j = 1..L, sigma <- N^dag(sigma), then sigma <- g_j sigma g_j^dag.
  QuantumState sigma = QuantumState::zero(circuit_qubits(spec), Representation::Mixed);
  for (const Gate& g : std::get<Circuit>(prepared)) {
    apply_noise_adjoint(sigma, noise, gate_qubits(g));
    apply_gate(sigma, g);
  }
  return sigma;
}

double kernel_entry(const FeatureMapSpec& spec, std::span<const double> x, std::span<const double> y,
                    const std::optional<NoiseModel>& noise) {
  check_same_dimension(x, y);
  if (!noise) {
    const Complex overlap = inner_product(encode_state(spec, y), encode_state(spec, x));
    return std::norm(overlap);
  }
  QuantumState rho = encode_density(spec, x, *noise);
  PreparedMap prepared_y = prepare_map(spec, y);
  if (auto* enc = std::get_if<AmplitudeEncoding>(&prepared_y)) {
    // Exact state preparation: project onto |psi(y)>.
    const QuantumState psi = amplitude_state(*enc);
    const std::size_t d = psi.dim();
    Complex s = 0.0;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) s += std::conj(psi.amplitude(r)) * rho.element(r, c) * psi.amplitude(c);
    return s.real();
  }
  const Circuit& uy = std::get<Circuit>(prepared_y);
  for (auto it = uy.rbegin(); it != uy.rend(); ++it) {
    apply_unitary(rho, gate_matrix(it->kind, it->angle).adjoint(), gate_qubits(*it));
    apply_noise(rho, *noise, gate_qubits(*it));
  }
  return rho.element(0, 0).real();
}

std::vector<std::string> default_sample_ids(std::size_t count, const std::string& prefix) {
  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

GramMatrix gram_matrix(const FeatureMapSpec& spec, const Matrix& X, const Matrix* Y, const KernelOptions& options) {
  if (X.rows() == 0 || (Y && Y->rows() == 0)) throw ShapeError("gram_matrix needs non-empty sample sets");
  if (Y && Y->cols() != X.cols()) throw BindingError("gram_matrix: sample sets differ in feature dimension");
  if (options.noise) options.noise->validate();

  const bool square = Y == nullptr;
  const Matrix& cols = square ? X : *Y;
  const std::size_t m = X.rows(), k = cols.rows();
  GramMatrix gram;
  gram.values = Matrix(m, k);
  gram.row_ids = default_sample_ids(m);
  gram.col_ids = square ? gram.row_ids : default_sample_ids(k, "t");

  auto fill = [&](auto&& row_states, auto&& col_states, auto&& entry) {
    parallel_for(m, options.threads, [&](std::size_t i) {
      for (std::size_t j = square ? i : 0; j < k; ++j) gram.values(i, j) = entry(row_states[i], col_states[j]);
    });
    if (square)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < i; ++j) gram.values(i, j) = gram.values(j, i);
  };

  if (!options.noise) {
    std::vector<std::optional<QuantumState>> xs(m), ys(square ? 0 : k);
    parallel_for(m, options.threads, [&](std::size_t i) { xs[i] = encode_state(spec, X.row(i)); });
    if (!square) parallel_for(k, options.threads, [&](std::size_t j) { ys[j] = encode_state(spec, cols.row(j)); });
    const auto& cs = square ? xs : ys;
    fill(xs, cs, [](const std::optional<QuantumState>& a, const std::optional<QuantumState>& b) {
      return std::norm(inner_product(*b, *a));
    });
    return gram;
  }

  const NoiseModel noise = *options.noise;
  std::vector<std::optional<QuantumState>> rhos(m), sigmas(k);
  parallel_for(m, options.threads, [&](std::size_t i) { rhos[i] = encode_density(spec, X.row(i), noise); });
  parallel_for(k, options.threads, [&](std::size_t j) { sigmas[j] = uncompute_observable(spec, cols.row(j), noise); });
  fill(rhos, sigmas, [](const std::optional<QuantumState>& rho, const std::optional<QuantumState>& sigma) {
    return trace_product(*rho, *sigma);
  });
  return gram;
}

GramDiagnostics diagnose(const GramMatrix& gram) {
  GramDiagnostics d;
  const Matrix& v = gram.values;
  if (v.empty()) return d;
  d.min_entry = d.max_entry = v(0, 0);
  for (double x : v.values()) {
    d.min_entry = std::min(d.min_entry, x);
    d.max_entry = std::max(d.max_entry, x);
  }
  if (gram.is_square()) {
    d.min_diagonal = d.max_diagonal = v(0, 0);
    for (std::size_t i = 0; i < v.rows(); ++i) {
      d.min_diagonal = std::min(d.min_diagonal, v(i, i));
      d.max_diagonal = std::max(d.max_diagonal, v(i, i));
      for (std::size_t j = 0; j < i; ++j) d.max_asymmetry = std::max(d.max_asymmetry, std::abs(v(i, j) - v(j, i)));
    }
    d.min_eigenvalue = symmetric_eigenvalues(v).front();
  }
  return d;
}

void write_gram_csv(std::ostream& out, const GramMatrix& gram) {
  out << "id";
  for (const auto& id : gram.col_ids) out << ',' << id;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < gram.values.rows(); ++i) {
    out << gram.row_ids.at(i);
    for (std::size_t j = 0; j < gram.values.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", gram.values(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

GramMatrix read_gram_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("gram csv: missing header row");
  auto header = split_csv(line);
  if (header.empty() || header[0] != "id") throw ParseError("gram csv: header must start with 'id'");
  GramMatrix gram;
  gram.col_ids.assign(header.begin() + 1, header.end());
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ParseError("gram csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    gram.row_ids.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      const std::string& f = fields[j];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size())
        throw ParseError("gram csv line " + std::to_string(line_no) + ": bad number '" + f + "'");
      values.push_back(v);
    }
  }
  gram.values = Matrix(gram.row_ids.size(), gram.col_ids.size());
  std::copy(values.begin(), values.end(), gram.values.values().begin());
  return gram;
}

}  // namespace hwqsvm
