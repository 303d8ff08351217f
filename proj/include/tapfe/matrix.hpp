#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace tapfe {

using Vector = std::vector<double>;

/// Dense row-major square-or-rectangular matrix. Symmetric matrices are stored
/// in full; kernels read whole rows.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix square(std::size_t n, double fill = 0.0) { return Matrix(n, n, fill); }
  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return data_; }

  /// Column-major Eigen view is the transpose; for symmetric matrices the two coincide.
  using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const EigenRowMajor> eigen() const {
    return Eigen::Map<const EigenRowMajor>(data_.data(), Eigen::Index(rows_), Eigen::Index(cols_));
  }
  Eigen::Map<EigenRowMajor> eigen() {
    return Eigen::Map<EigenRowMajor>(data_.data(), Eigen::Index(rows_), Eigen::Index(cols_));
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace tapfe
