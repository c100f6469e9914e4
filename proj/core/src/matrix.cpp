#include "weakshot/matrix.hpp"

#include <cmath>
#include <string>

#include "weakshot/errors.hpp"

namespace weakshot {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
  rows = init.size();
  cols = rows ? init.begin()->size() : 0;
  data.reserve(rows * cols);
  for (const auto& r : init) {
    if (r.size() != cols) throw shape_error("Matrix init: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
}

bool Matrix::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw shape_error("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                      " * " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  Matrix c(a.rows, b.cols);
  // ikj order: the inner j loop runs over contiguous memory in both b and c.
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows)
    throw shape_error("matmul_tn: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                      "^T * " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  Matrix c(a.cols, b.cols);
  for (std::size_t m = 0; m < a.rows; ++m) {
    const double* arow = a.row(m);
    const double* brow = b.row(m);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double ami = arow[i];
      if (ami == 0.0) continue;
      double* crow = c.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += ami * brow[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* where) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw shape_error(std::string(where) + ": shape mismatch " + std::to_string(a.rows) + "x" +
                      std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                      std::to_string(b.cols));
}

}  // namespace weakshot
