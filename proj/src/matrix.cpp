#include "drnet/matrix.hpp"

#include <cmath>

#include "drnet/errors.hpp"

namespace drnet {

Matrix::Matrix(std::size_t rows, std::size_t cols, double value)
    : rows_(rows), cols_(cols), data_(rows * cols, value) {}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != m.cols_) throw ShapeError("from_rows: ragged row lengths");
    std::size_t c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + ")");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

std::vector<double> matvec(const Matrix& w, const std::vector<double>& x) {
  if (x.size() != w.cols())
    throw ShapeError("matvec: vector length " + std::to_string(x.size()) +
                     " does not match matrix cols " + std::to_string(w.cols()));
  std::vector<double> y(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) acc += w(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

}  // namespace drnet
