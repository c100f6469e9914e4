#include "weakshot/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "weakshot/errors.hpp"

namespace weakshot {

BinaryCeResult binary_ce(double score, int label) {
  if (label != 0 && label != 1) throw numeric_error("binary_ce: label must be 0 or 1");
  const double s = std::clamp(score, kProbEps, 1.0 - kProbEps);
  BinaryCeResult r;
  if (label == 1) {
    r.loss = -std::log(s);
    r.dscore = -1.0 / s;
  } else {
    r.loss = -std::log(1.0 - s);
    r.dscore = 1.0 / (1.0 - s);
  }
  return r;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* row = logits.row(i);
    double mx = row[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    double* prow = p.row(i);
    for (std::size_t j = 0; j < logits.cols; ++j) {
      prow[j] = std::exp(row[j] - mx);
      sum += prow[j];
    }
    for (std::size_t j = 0; j < logits.cols; ++j) prow[j] /= sum;
  }
  return p;
}

SoftmaxCeResult softmax_ce(const Matrix& logits, std::span<const int> labels) {
  if (logits.rows != labels.size())
    throw shape_error("softmax_ce: " + std::to_string(logits.rows) + " rows vs " +
                      std::to_string(labels.size()) + " labels");
  if (logits.rows == 0) throw shape_error("softmax_ce: empty batch");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= logits.cols)
      throw std::out_of_range("softmax_ce: label " + std::to_string(labels[i]) +
                              " out of range [0, " + std::to_string(logits.cols) + ") at row " +
                              std::to_string(i));

  const double inv_b = 1.0 / static_cast<double>(logits.rows);
  SoftmaxCeResult r;
  r.per_sample_loss.resize(logits.rows);
  r.dlogits = Matrix(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* row = logits.row(i);
    double mx = row[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    double* drow = r.dlogits.row(i);
    for (std::size_t j = 0; j < logits.cols; ++j) {
      drow[j] = std::exp(row[j] - mx);
      sum += drow[j];
    }
    const std::size_t y = static_cast<std::size_t>(labels[i]);
    // loss = log(sum exp(z - mx)) - (z_y - mx)
    r.per_sample_loss[i] = std::log(sum) - (row[y] - mx);
    for (std::size_t j = 0; j < logits.cols; ++j) drow[j] = drow[j] / sum * inv_b;
    drow[y] -= inv_b;
  }
  return r;
}

}  // namespace weakshot
