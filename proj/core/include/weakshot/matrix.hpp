#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace weakshot {

/// Dense row-major matrix of 64-bit floats. The workhorse container for
/// features, activations, score matrices and parameter tensors.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows*cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init);

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  std::size_t size() const { return data.size(); }
  bool all_finite() const;

  static Matrix identity(std::size_t n);

  bool operator==(const Matrix& other) const = default;
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B, accumulated without materializing A^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

void check_same_shape(const Matrix& a, const Matrix& b, const char* where);

}  // namespace weakshot
