#pragma once

#include <span>
#include <vector>

#include "weakshot/matrix.hpp"

namespace weakshot {

/// Probabilities are clamped to [kProbEps, 1 - kProbEps] before any log.
inline constexpr double kProbEps = 1e-7;

struct BinaryCeResult {
  double loss;    // >= 0
  double dscore;  // d(loss)/d(score), evaluated at the clamped score
};

/// Binary cross-entropy of a similarity/discriminator score against a 0/1
/// label.
BinaryCeResult binary_ce(double score, int label);

struct SoftmaxCeResult {
  std::vector<double> per_sample_loss;  // -log softmax(logits)_y, one per row
  Matrix dlogits;                       // gradient of the mean loss w.r.t. logits
};

/// Numerically stabilized softmax cross-entropy over a batch of logits.
/// Gradients are for the mean of the per-sample losses.
SoftmaxCeResult softmax_ce(const Matrix& logits, std::span<const int> labels);

/// Row-wise softmax with max-subtraction.
Matrix softmax_rows(const Matrix& logits);

}  // namespace weakshot
