#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hwqsvm/matrix.hpp"
#include "json.hpp"

namespace hwqsvm {

struct SvmOptions {
  double C = 1.0;
  double tolerance = 1e-3;           ///< maximal KKT violation at convergence
  long max_passes = 10000;           ///< one pass = n pair updates
};

/// Soft-margin dual solution on a precomputed kernel.
struct SvmModel {
  std::vector<double> alpha;      ///< 0 <= alpha_i <= C
  std::vector<double> dual_coef;  ///< alpha_i * y_i
  std::vector<int> support;       ///< indices with alpha_i >= 1e-8
  double bias = 0.0;
  double C = 1.0;
  double objective = 0.0;  ///< sum(alpha) - 1/2 alpha^T Q alpha
  long iterations = 0;
  bool converged = false;
  bool non_psd_warning = false;  ///< a negative curvature pair was clamped
};

/// SMO with second-order working-set selection. Labels are +1/-1 and must
/// contain both classes (DegenerateInputError otherwise).
SvmModel train_precomputed(const Matrix& K, std::span<const int> y, const SvmOptions& options = {});

/// Decision values sum_j coef_j K[i, j] + b for a (test x train) kernel.
std::vector<double> decision_function(const SvmModel& model, const Matrix& K_test);

/// sign of the decision value; exact zero maps to +1.
std::vector<int> predict(const SvmModel& model, const Matrix& K_test);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(const Matrix& K, std::span<const int> y, std::span<const double> alpha);

struct ConfusionMatrix {
  int tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Binary metrics with +1 (malignant) as the positive class.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionMatrix confusion;
};

Metrics metrics_from_confusion(const ConfusionMatrix& cm);
Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted);

struct ClassicalKernel {
  enum class Kind { Linear, Rbf };
  Kind kind = Kind::Linear;
  double gamma = 1.0;  ///< RBF only, must be > 0
};

/// Linear x.y or RBF exp(-gamma |x - y|^2) between the rows of X and Y.
Matrix classical_kernel(const Matrix& X, const Matrix& Y, const ClassicalKernel& kernel);

/// Stratified fold assignment: each class is shuffled with a stream derived
/// from `seed` and dealt round-robin into `folds` folds.
std::vector<int> stratified_folds(std::span<const int> y, int folds, std::uint64_t seed);

struct CvResult {
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracy;  ///< NaN for skipped folds
  int skipped_folds = 0;
};

/// k-fold CV on a precomputed kernel. Folds whose training part holds a
/// single class are skipped and counted.
CvResult cross_validate(const Matrix& K, std::span<const int> y, double C, int folds, std::uint64_t seed,
                        const SvmOptions& base = {});

struct GridPoint {
  double C = 1.0;
  double gamma = 0.0;
  double cv_accuracy = 0.0;
};

struct GridSearchResult {
  GridPoint best;
  std::vector<GridPoint> points;
  SvmModel model;  ///< refit on the full training set
  Metrics train_metrics;
};

struct GridSearchOptions {
  int folds = 5;
  std::uint64_t seed = 42;
  int threads = 1;
};

/// CV accuracy at every grid point; ties go to smaller C, then smaller
/// gamma. gamma_grid is ignored for the linear kernel.
GridSearchResult grid_search(const Matrix& X_train, std::span<const int> y_train, ClassicalKernel::Kind kind,
                             std::span<const double> C_grid, std::span<const double> gamma_grid,
                             const GridSearchOptions& options = {});

nlohmann::json model_to_json(const SvmModel& model);
SvmModel model_from_json(const nlohmann::json& j);
nlohmann::json metrics_to_json(const Metrics& m);

}  // namespace hwqsvm
