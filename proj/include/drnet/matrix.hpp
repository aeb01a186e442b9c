#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace drnet {

/// Dense row-major matrix of doubles. No broadcasting: shapes are explicit
/// and mismatches throw ShapeError.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  Matrix transposed() const;
  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Standard matrix product. Throws ShapeError unless a.cols() == b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

/// y = W·x. Throws ShapeError unless x.size() == W.cols().
std::vector<double> matvec(const Matrix& w, const std::vector<double>& x);

}  // namespace drnet
