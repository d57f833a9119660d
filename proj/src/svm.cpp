#include "hwqsvm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hwqsvm/error.hpp"
#include "hwqsvm/parallel.hpp"
#include "hwqsvm/random.hpp"

namespace hwqsvm {

namespace {

constexpr double kTau = 1e-12;
constexpr double kSupportThreshold = 1e-8;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_labels(std::span<const int> y) {
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw InvalidParameterError("labels must be +1 or -1");
  }
  if (!pos || !neg) throw DegenerateInputError("training labels contain a single class");
}

}  // namespace

double dual_objective(const Matrix& K, std::span<const int> y, std::span<const double> alpha) {
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < alpha.size(); ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * K(i, j);
  }
  return linear - 0.5 * quad;
}

SvmModel train_precomputed(const Matrix& K, std::span<const int> y, const SvmOptions& options) {
  if (K.rows() != K.cols()) throw ShapeError("train_precomputed: kernel must be square");
  if (K.rows() != y.size()) throw ShapeError("train_precomputed: label count does not match kernel");
  if (!(options.C > 0.0)) throw InvalidParameterError("C must be positive");
  check_labels(y);

  const std::size_t n = y.size();
  const double C = options.C;
  SvmModel model;
  model.C = C;
  std::vector<double>& alpha = model.alpha;
  alpha.assign(n, 0.0);
  // Minimize 1/2 a^T Q a - e^T a, Q_ij = y_i y_j K_ij. G = Q a - e.
  std::vector<double> G(n, -1.0);
  for (std::size_t i = 0; i < n; ++i)
    if (K(i, i) < -1e-10) model.non_psd_warning = true;

  auto upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto q = [&](std::size_t a, std::size_t b) { return static_cast<double>(y[a] * y[b]) * K(a, b); };

  const long max_iter = options.max_passes * static_cast<long>(std::max<std::size_t>(n, 1));
  long iter = 0;
  for (; iter < max_iter; ++iter) {
    double gmax = -kInf, gmax2 = -kInf;
    std::ptrdiff_t i = -1, j = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!upper(t) && -G[t] >= gmax) { gmax = -G[t]; i = static_cast<std::ptrdiff_t>(t); }
      } else if (!lower(t) && G[t] >= gmax) {
        gmax = G[t];
        i = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (i < 0) { model.converged = true; break; }
    const std::size_t ii = static_cast<std::size_t>(i);
    double best = kInf;
    for (std::size_t t = 0; t < n; ++t) {
      double grad_diff;
      if (y[t] == 1) {
        if (lower(t)) continue;
        gmax2 = std::max(gmax2, G[t]);
        grad_diff = gmax + G[t];
      } else {
        if (upper(t)) continue;
        gmax2 = std::max(gmax2, -G[t]);
        grad_diff = gmax - G[t];
      }
      if (grad_diff > 0.0) {
        double quad = K(ii, ii) + K(t, t) - 2.0 * K(ii, t);
        if (quad < -1e-10) model.non_psd_warning = true;
        if (quad <= 0.0) quad = kTau;
        const double obj = -(grad_diff * grad_diff) / quad;
        if (obj <= best) { best = obj; j = static_cast<std::ptrdiff_t>(t); }
      }
    }
    if (gmax + gmax2 < options.tolerance || j < 0) { model.converged = true; break; }
    const std::size_t jj = static_cast<std::size_t>(j);

    const double old_i = alpha[ii], old_j = alpha[jj];
    double quad = K(ii, ii) + K(jj, jj) - 2.0 * K(ii, jj);
    if (quad <= 0.0) quad = kTau;
    if (y[ii] != y[jj]) {
      const double delta = (-G[ii] - G[jj]) / quad;
      const double diff = alpha[ii] - alpha[jj];
      alpha[ii] += delta;
      alpha[jj] += delta;
      if (diff > 0) {
        if (alpha[jj] < 0) { alpha[jj] = 0; alpha[ii] = diff; }
      } else if (alpha[ii] < 0) {
        alpha[ii] = 0;
        alpha[jj] = -diff;
      }
      if (diff > 0) {
        if (alpha[ii] > C) { alpha[ii] = C; alpha[jj] = C - diff; }
      } else if (alpha[jj] > C) {
        alpha[jj] = C;
        alpha[ii] = C + diff;
      }
    } else {
      const double delta = (G[ii] - G[jj]) / quad;
      const double sum = alpha[ii] + alpha[jj];
      alpha[ii] -= delta;
      alpha[jj] += delta;
      if (sum > C) {
        if (alpha[ii] > C) { alpha[ii] = C; alpha[jj] = sum - C; }
        if (alpha[jj] > C) { alpha[jj] = C; alpha[ii] = sum - C; }
      } else {
        if (alpha[jj] < 0) { alpha[jj] = 0; alpha[ii] = sum; }
        if (alpha[ii] < 0) { alpha[ii] = 0; alpha[jj] = sum; }
      }
    }
    const double di = alpha[ii] - old_i, dj = alpha[jj] - old_j;
    for (std::size_t t = 0; t < n; ++t) G[t] += q(ii, t) * di + q(jj, t) * dj;
  }
  model.iterations = iter;

  // rho from free vectors, else midpoint of the feasible interval.
  double ub = kInf, lb = -kInf, sum_free = 0.0;
  int free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      sum_free += yg;
    }
  }
  const double rho = free_count > 0 ? sum_free / free_count : (ub + lb) / 2.0;
  model.bias = -rho;

  model.dual_coef.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    model.dual_coef[t] = alpha[t] * y[t];
    if (alpha[t] >= kSupportThreshold) model.support.push_back(static_cast<int>(t));
  }
  model.objective = dual_objective(K, y, alpha);
  return model;
}

std::vector<double> decision_function(const SvmModel& model, const Matrix& K_test) {
  if (K_test.cols() != model.dual_coef.size())
    throw ShapeError("predict: kernel has " + std::to_string(K_test.cols()) + " columns, model expects " +
                     std::to_string(model.dual_coef.size()));
  std::vector<double> out(K_test.rows());
  for (std::size_t i = 0; i < K_test.rows(); ++i) {
    double s = model.bias;
    for (int j : model.support) s += model.dual_coef[static_cast<std::size_t>(j)] * K_test(i, static_cast<std::size_t>(j));
    out[i] = s;
  }
  return out;
}

std::vector<int> predict(const SvmModel& model, const Matrix& K_test) {
  auto f = decision_function(model, K_test);
  std::vector<int> labels(f.size());
  std::transform(f.begin(), f.end(), labels.begin(), [](double v) { return v < 0.0 ? -1 : 1; });
  return labels;
}

Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
  Metrics m;
  m.confusion = cm;
  const int total = cm.tp + cm.fp + cm.fn + cm.tn;
  m.accuracy = total > 0 ? static_cast<double>(cm.tp + cm.tn) / total : 0.0;
  m.precision = cm.tp + cm.fp > 0 ? static_cast<double>(cm.tp) / (cm.tp + cm.fp) : 0.0;
  m.recall = cm.tp + cm.fn > 0 ? static_cast<double>(cm.tp) / (cm.tp + cm.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw ShapeError("compute_metrics: length mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == 1) (truth[i] == 1 ? cm.tp : cm.fp)++;
    else (truth[i] == 1 ? cm.fn : cm.tn)++;
  }
  return metrics_from_confusion(cm);
}

Matrix classical_kernel(const Matrix& X, const Matrix& Y, const ClassicalKernel& kernel) {
  if (X.cols() != Y.cols()) throw ShapeError("classical_kernel: feature dimensions differ");
  if (kernel.kind == ClassicalKernel::Kind::Rbf && !(kernel.gamma > 0.0))
    throw InvalidParameterError("RBF gamma must be positive");
  Matrix K(X.rows(), Y.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto a = X.row(i);
    for (std::size_t j = 0; j < Y.rows(); ++j) {
      const auto b = Y.row(j);
      double s = 0.0;
      if (kernel.kind == ClassicalKernel::Kind::Linear) {
        for (std::size_t f = 0; f < a.size(); ++f) s += a[f] * b[f];
        K(i, j) = s;
      } else {
        for (std::size_t f = 0; f < a.size(); ++f) s += (a[f] - b[f]) * (a[f] - b[f]);
        K(i, j) = std::exp(-kernel.gamma * s);
      }
    }
  }
  return K;
}

std::vector<int> stratified_folds(std::span<const int> y, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidParameterError("cross-validation needs at least 2 folds");
  if (y.size() < static_cast<std::size_t>(folds)) throw InvalidParameterError("fewer samples than folds");
  std::vector<int> assignment(y.size(), 0);
  int offset = 0;
  for (int label : {1, -1}) {
    std::vector<int> members;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == label) members.push_back(static_cast<int>(i));
    auto rng = RandomStream::derive(seed, "cv-folds", {static_cast<std::uint64_t>(label + 1)});
    rng.shuffle(members);
    // Continue dealing where the previous class stopped to balance fold sizes.
    for (std::size_t k = 0; k < members.size(); ++k)
      assignment[static_cast<std::size_t>(members[k])] = static_cast<int>((k + static_cast<std::size_t>(offset)) % static_cast<std::size_t>(folds));
    offset = static_cast<int>((members.size() + static_cast<std::size_t>(offset)) % static_cast<std::size_t>(folds));
  }
  return assignment;
}

CvResult cross_validate(const Matrix& K, std::span<const int> y, double C, int folds, std::uint64_t seed,
                        const SvmOptions& base) {
  if (K.rows() != K.cols() || K.rows() != y.size()) throw ShapeError("cross_validate: kernel/label shape mismatch");
  const auto assignment = stratified_folds(y, folds, seed);
  CvResult result;
  double sum = 0.0;
  int used = 0;
  SvmOptions opts = base;
  opts.C = C;
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train, held;
    for (std::size_t i = 0; i < y.size(); ++i) (assignment[i] == f ? held : train).push_back(static_cast<int>(i));
    std::vector<int> y_train;
    for (int i : train) y_train.push_back(y[static_cast<std::size_t>(i)]);
    const bool both = std::find(y_train.begin(), y_train.end(), 1) != y_train.end() &&
                      std::find(y_train.begin(), y_train.end(), -1) != y_train.end();
    if (!both || held.empty()) {
      result.fold_accuracy.push_back(std::numeric_limits<double>::quiet_NaN());
      ++result.skipped_folds;
      continue;
    }
    const SvmModel model = train_precomputed(K.select(train, train), y_train, opts);
    const auto pred = predict(model, K.select(held, train));
    int correct = 0;
    for (std::size_t k = 0; k < held.size(); ++k) correct += pred[k] == y[static_cast<std::size_t>(held[k])];
    const double acc = static_cast<double>(correct) / static_cast<double>(held.size());
    result.fold_accuracy.push_back(acc);
    sum += acc;
    ++used;
  }
  if (used == 0) throw DegenerateInputError("every cross-validation fold was skipped");
  result.mean_accuracy = sum / used;
  return result;
}

GridSearchResult grid_search(const Matrix& X_train, std::span<const int> y_train, ClassicalKernel::Kind kind,
                             std::span<const double> C_grid, std::span<const double> gamma_grid,
                             const GridSearchOptions& options) {
  if (C_grid.empty()) throw InvalidParameterError("grid_search: empty C grid");
  const bool rbf = kind == ClassicalKernel::Kind::Rbf;
  if (rbf && gamma_grid.empty()) throw InvalidParameterError("grid_search: empty gamma grid");
  std::vector<double> gammas = rbf ? std::vector<double>(gamma_grid.begin(), gamma_grid.end()) : std::vector<double>{0.0};

  GridSearchResult result;
  result.points.resize(gammas.size() * C_grid.size());
  std::vector<Matrix> kernels(gammas.size());
  parallel_for(gammas.size(), options.threads, [&](std::size_t g) {
    kernels[g] = classical_kernel(X_train, X_train, {kind, rbf ? gammas[g] : 1.0});
  });
  parallel_for(result.points.size(), options.threads, [&](std::size_t p) {
    const std::size_t g = p / C_grid.size(), c = p % C_grid.size();
    const auto cv = cross_validate(kernels[g], y_train, C_grid[c], options.folds, options.seed);
    result.points[p] = GridPoint{C_grid[c], gammas[g], cv.mean_accuracy};
  });

  const GridPoint* best = nullptr;
  for (const auto& pt : result.points) {
    if (!best || pt.cv_accuracy > best->cv_accuracy + 1e-12) {
      best = &pt;
    } else if (std::abs(pt.cv_accuracy - best->cv_accuracy) <= 1e-12 &&
               (pt.C < best->C || (pt.C == best->C && pt.gamma < best->gamma))) {
      best = &pt;
    }
  }
  result.best = *best;
  const std::size_t g = static_cast<std::size_t>(std::find(gammas.begin(), gammas.end(), best->gamma) - gammas.begin());
  SvmOptions opts;
  opts.C = best->C;
  result.model = train_precomputed(kernels[g], y_train, opts);
  result.train_metrics = compute_metrics(y_train, predict(result.model, kernels[g]));
  return result;
}

nlohmann::json model_to_json(const SvmModel& model) {
  return nlohmann::json{{"alpha", model.alpha},
                        {"dual_coef", model.dual_coef},
                        {"support", model.support},
                        {"bias", model.bias},
                        {"C", model.C},
                        {"objective", model.objective},
                        {"iterations", model.iterations},
                        {"converged", model.converged},
                        {"non_psd_warning", model.non_psd_warning}};
}

SvmModel model_from_json(const nlohmann::json& j) {
  SvmModel m;
  try {
    j.at("alpha").get_to(m.alpha);
    j.at("dual_coef").get_to(m.dual_coef);
    j.at("support").get_to(m.support);
    m.bias = j.at("bias").get<double>();
    m.C = j.at("C").get<double>();
    m.objective = j.value("objective", 0.0);
    m.iterations = j.value("iterations", 0L);
    m.converged = j.value("converged", true);
    m.non_psd_warning = j.value("non_psd_warning", false);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("svm model json: ") + e.what());
  }
  if (m.alpha.size() != m.dual_coef.size()) throw ParseError("svm model json: alpha/dual_coef length mismatch");
  for (int s : m.support)
    if (s < 0 || static_cast<std::size_t>(s) >= m.dual_coef.size()) throw ParseError("svm model json: bad support index");
  return m;
}

nlohmann::json metrics_to_json(const Metrics& m) {
  return nlohmann::json{{"accuracy", m.accuracy},
                        {"precision", m.precision},
                        {"recall", m.recall},
                        {"f1", m.f1},
                        {"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"fn", m.confusion.fn}, {"tn", m.confusion.tn}}}};
}

}  // namespace hwqsvm
