#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hwqsvm/matrix.hpp"
#include "json.hpp"

namespace hwqsvm {

/// Samples x features with +1 (malignant) / -1 (benign) labels.
struct Dataset {
  Matrix X;
  std::vector<int> y;
  std::vector<std::string> ids;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t feature_count() const noexcept { return X.cols(); }
  int positives() const;
  int negatives() const;
  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset with_features(std::span<const std::size_t> columns) const;
};

/// UCI wdbc.data layout: id, diagnosis (M/B), 30 reals per line.
Dataset parse_wdbc(const std::string& text);
Dataset load_wdbc(const std::string& path);

/// Sample variance (n - 1 denominator) of every column.
std::vector<double> column_variances(const Matrix& X);

/// Indices of the k highest-variance columns, descending by variance,
/// equal variances ordered by index.
std::vector<std::size_t> select_top_variance(const Matrix& X, int k);

/// z-score transform fitted on one matrix and applied to others.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  ///< sample std, or 1 where std < 1e-12

  static Standardizer fit(const Matrix& X);
  Matrix apply(const Matrix& X) const;
};

struct SplitSpec {
  double train_fraction = 0.8;
  bool stratified = true;
  std::uint64_t seed = 42;
  int nas_subsample = 200;
  int top_k_features = 10;

  void validate() const;
};

/// Train/test row indices, each sorted ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-class counts of a stratified draw of `total` from `class_sizes`:
/// floor of the proportional share, remaining slots by largest remainder,
/// ties to the larger class.
std::vector<int> allocate_stratified(std::span<const int> class_sizes, int total);

/// n_train = floor(fraction * n). Each class is shuffled with its own
/// seeded stream; the test share per class comes from allocate_stratified.
/// Throws DegenerateInputError when a class cannot appear on both sides.
Split stratified_split(std::span<const int> y, const SplitSpec& spec);

/// Stratified `count` of the given rows (positions into y), sorted.
std::vector<std::size_t> nas_subsample(std::span<const int> y, std::span<const std::size_t> rows, int count,
                                       std::uint64_t seed);

nlohmann::json split_manifest_json(const SplitSpec& spec, const Split& split, std::span<const std::size_t> subsample,
                                   std::span<const std::size_t> features);

}  // namespace hwqsvm
