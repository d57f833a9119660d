#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hwqsvm {

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  /// Rows and columns picked by index (a sub-Gram matrix, a data subset).
  Matrix select(std::span<const int> row_idx, std::span<const int> col_idx) const;
  Matrix select_rows(std::span<const int> row_idx) const;
  Matrix select_cols(std::span<const int> col_idx) const;
  Matrix select(std::span<const std::size_t> row_idx, std::span<const std::size_t> col_idx) const;
  Matrix select_rows(std::span<const std::size_t> row_idx) const;
  Matrix select_cols(std::span<const std::size_t> col_idx) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Eigenvalues of a symmetric matrix in ascending order (Householder
/// tridiagonalization followed by implicit QL). Only the lower triangle is
/// read.
std::vector<double> symmetric_eigenvalues(const Matrix& a);

}  // namespace hwqsvm
