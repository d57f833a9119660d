#include "hwqsvm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hwqsvm/error.hpp"
#include "hwqsvm/random.hpp"

namespace hwqsvm {

namespace {

constexpr std::size_t kWdbcFeatures = 30;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

int Dataset::positives() const { return static_cast<int>(std::count(y.begin(), y.end(), 1)); }
int Dataset::negatives() const { return static_cast<int>(std::count(y.begin(), y.end(), -1)); }

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.X = X.select_rows(rows);
  for (auto r : rows) {
    out.y.push_back(y.at(r));
    out.ids.push_back(ids.at(r));
  }
  return out;
}

Dataset Dataset::with_features(std::span<const std::size_t> columns) const {
  Dataset out = *this;
  out.X = X.select_cols(columns);
  return out;
}

Dataset parse_wdbc(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::vector<double> values;
  Dataset data;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto where = "wdbc line " + std::to_string(line_no);
    const auto fields = split_fields(line);
    if (fields.size() != kWdbcFeatures + 2)
      throw ParseError(where + ": expected " + std::to_string(kWdbcFeatures + 2) + " columns, got " +
                       std::to_string(fields.size()));
    const auto diagnosis = trim(fields[1]);
    if (diagnosis == "M") data.y.push_back(1);
    else if (diagnosis == "B") data.y.push_back(-1);
    else throw ParseError(where + ": diagnosis must be M or B, got '" + std::string(diagnosis) + "'");
    data.ids.emplace_back(trim(fields[0]));
    for (std::size_t f = 0; f < kWdbcFeatures; ++f) {
      const auto field = trim(fields[f + 2]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v))
        throw ParseError(where + ": bad value '" + std::string(field) + "' in column " + std::to_string(f + 3));
      values.push_back(v);
    }
  }
  if (data.y.empty()) throw ParseError("wdbc: no samples");
  data.X = Matrix(data.y.size(), kWdbcFeatures);
  std::copy(values.begin(), values.end(), data.X.values().begin());
  return data;
}

Dataset load_wdbc(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_wdbc(buffer.str());
}

std::vector<double> column_variances(const Matrix& X) {
  const std::size_t n = X.rows(), d = X.cols();
  if (n < 2) throw DegenerateInputError("variance needs at least two samples");
  std::vector<double> var(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += X(r, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (X(r, c) - mean) * (X(r, c) - mean);
    var[c] = ss / static_cast<double>(n - 1);
  }
  return var;
}

std::vector<std::size_t> select_top_variance(const Matrix& X, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > X.cols())
    throw InvalidParameterError("top-variance k=" + std::to_string(k) + " outside [1, " + std::to_string(X.cols()) + "]");
  const auto var = column_variances(X);
  std::vector<std::size_t> idx(X.cols());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

Standardizer Standardizer::fit(const Matrix& X) {
  Standardizer s;
  const std::size_t n = X.rows(), d = X.cols();
  if (n == 0) throw DegenerateInputError("cannot standardize an empty matrix");
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  for (std::size_t c = 0; c < d; ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < n; ++r) m += X(r, c);
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (X(r, c) - m) * (X(r, c) - m);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    s.mean[c] = m;
    s.scale[c] = sd < 1e-12 ? 1.0 : sd;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& X) const {
  if (X.cols() != mean.size()) throw ShapeError("standardizer fitted on " + std::to_string(mean.size()) + " features, got " + std::to_string(X.cols()));
  Matrix out(X.rows(), X.cols());
  for (std::size_t r = 0; r < X.rows(); ++r)
    for (std::size_t c = 0; c < X.cols(); ++c) out(r, c) = (X(r, c) - mean[c]) / scale[c];
  return out;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  if (nas_subsample < 2) throw ConfigError("nas_subsample must be at least 2");
  if (top_k_features < 1) throw ConfigError("top_k_features must be at least 1");
}

std::vector<int> allocate_stratified(std::span<const int> class_sizes, int total) {
  const int n = std::accumulate(class_sizes.begin(), class_sizes.end(), 0);
  if (total < 0 || total > n) throw InvalidParameterError("stratified allocation of " + std::to_string(total) + " from " + std::to_string(n));
  std::vector<int> out(class_sizes.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int used = 0;
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    // integer arithmetic keeps the floor exact
    const long long num = static_cast<long long>(total) * class_sizes[c];
    out[c] = static_cast<int>(num / n);
    used += out[c];
    remainders.emplace_back(static_cast<double>(num % n) / n, c);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return class_sizes[a.second] > class_sizes[b.second];
  });
  for (std::size_t i = 0; used < total; ++i, ++used) ++out[remainders[i].second];
  return out;
}

namespace {

// Class members (positions into `rows`) ordered: positives, then negatives.
std::array<std::vector<std::size_t>, 2> by_class(std::span<const int> y, std::span<const std::size_t> rows) {
  std::array<std::vector<std::size_t>, 2> out;
  for (auto r : rows) {
    if (y[r] == 1) out[0].push_back(r);
    else if (y[r] == -1) out[1].push_back(r);
    else throw DataError("labels must be +1 or -1");
  }
  return out;
}

}  // namespace

Split stratified_split(std::span<const int> y, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::size_t> all(y.size());
  std::iota(all.begin(), all.end(), 0);
  auto classes = by_class(y, all);
  const int n = static_cast<int>(y.size());
  const int n_train = static_cast<int>(std::floor(spec.train_fraction * n));
  const int n_test = n - n_train;
  Split split;
  if (!spec.stratified) {
    auto rng = RandomStream::derive(spec.seed, "split");
    rng.shuffle(all);
    split.train.assign(all.begin(), all.begin() + n_train);
    split.test.assign(all.begin() + n_train, all.end());
  } else {
    const std::array<int, 2> sizes{static_cast<int>(classes[0].size()), static_cast<int>(classes[1].size())};
    if (sizes[0] == 0 || sizes[1] == 0) throw DegenerateInputError("stratified split needs both classes");
    const auto test_share = allocate_stratified(sizes, n_test);
    for (std::size_t c = 0; c < 2; ++c) {
      if (test_share[c] < 1 || test_share[c] >= sizes[c])
        throw DegenerateInputError("class " + std::string(c == 0 ? "+1" : "-1") + " with " + std::to_string(sizes[c]) +
                                   " samples is too small to stratify");
      auto rng = RandomStream::derive(spec.seed, "split", {c});
      rng.shuffle(classes[c]);
      const auto cut = classes[c].begin() + (sizes[c] - test_share[c]);
      split.train.insert(split.train.end(), classes[c].begin(), cut);
      split.test.insert(split.test.end(), cut, classes[c].end());
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<std::size_t> nas_subsample(std::span<const int> y, std::span<const std::size_t> rows, int count,
                                       std::uint64_t seed) {
  if (count < 1 || static_cast<std::size_t>(count) > rows.size())
    throw InvalidParameterError("subsample of " + std::to_string(count) + " from " + std::to_string(rows.size()) + " rows");
  auto classes = by_class(y, rows);
  const std::array<int, 2> sizes{static_cast<int>(classes[0].size()), static_cast<int>(classes[1].size())};
  const auto share = allocate_stratified(sizes, count);
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < 2; ++c) {
    auto rng = RandomStream::derive(seed, "nas-subsample", {c});
    rng.shuffle(classes[c]);
    out.insert(out.end(), classes[c].begin(), classes[c].begin() + share[c]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json split_manifest_json(const SplitSpec& spec, const Split& split, std::span<const std::size_t> subsample,
                                   std::span<const std::size_t> features) {
  return nlohmann::json{{"seed", spec.seed},
                        {"train_fraction", spec.train_fraction},
                        {"stratified", spec.stratified},
                        {"nas_subsample", spec.nas_subsample},
                        {"top_k_features", spec.top_k_features},
                        {"train", split.train},
                        {"test", split.test},
                        {"subsample", std::vector<std::size_t>(subsample.begin(), subsample.end())},
                        {"features", std::vector<std::size_t>(features.begin(), features.end())}};
}

}  // namespace hwqsvm
