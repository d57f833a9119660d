#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hwqsvm/featuremap.hpp"
#include "hwqsvm/matrix.hpp"
#include "hwqsvm/simulator.hpp"

namespace hwqsvm {

/// Kernel values between two sample sets, with sample identifiers.
struct GramMatrix {
  Matrix values;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;

  bool is_square() const noexcept { return values.rows() == values.cols(); }
  double operator()(std::size_t r, std::size_t c) const { return values(r, c); }
};

/// |psi(x)> for a noiseless map.
QuantumState encode_state(const FeatureMapSpec& spec, std::span<const double> x);

/// Noise-evolved rho(x) = E_x(|0><0|).
QuantumState encode_density(const FeatureMapSpec& spec, std::span<const double> x, const NoiseModel& noise);

/// Heisenberg-picture observable for the noisy uncompute half:
/// sigma(y) = C_y^dagger(|0><0|), where C_y applies U(y)^dagger gate by gate
/// with noise after each gate. Then Tr[rho(x) sigma(y)] equals the
/// all-zeros probability of the compute-uncompute circuit.
QuantumState uncompute_observable(const FeatureMapSpec& spec, std::span<const double> y, const NoiseModel& noise);

/// Fidelity kernel K(x, y). Noiseless: |<psi(y)|psi(x)>|^2. Noisy: the
/// all-zeros probability after U(y)^dagger acting on the noise-evolved
/// rho(x), simulated explicitly on density matrices.
double kernel_entry(const FeatureMapSpec& spec, std::span<const double> x, std::span<const double> y,
                    const std::optional<NoiseModel>& noise = std::nullopt);

struct KernelOptions {
  std::optional<NoiseModel> noise;
  int threads = 1;
};

/// Gram matrix over the rows of X (square, upper triangle mirrored) or
/// between X rows and Y columns when Y is given. Encoded states are cached
/// per sample; entries are independent so the result does not depend on
/// the thread count.
GramMatrix gram_matrix(const FeatureMapSpec& spec, const Matrix& X, const Matrix* Y = nullptr,
                       const KernelOptions& options = {});

/// Default identifiers s0, s1, ...
std::vector<std::string> default_sample_ids(std::size_t count, const std::string& prefix = "s");

struct GramDiagnostics {
  double max_asymmetry = 0.0;
  double min_diagonal = 0.0;
  double max_diagonal = 0.0;
  double min_entry = 0.0;
  double max_entry = 0.0;
  double min_eigenvalue = 0.0;  ///< square form only
};

GramDiagnostics diagnose(const GramMatrix& gram);

/// CSV with a header row `id,<col ids>` and one `<row id>,<values>` line per row.
void write_gram_csv(std::ostream& out, const GramMatrix& gram);
GramMatrix read_gram_csv(std::istream& in);

}  // namespace hwqsvm
