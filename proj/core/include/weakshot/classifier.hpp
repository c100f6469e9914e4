#pragma once

#include <functional>
#include <span>
#include <vector>

#include "weakshot/dataset.hpp"
#include "weakshot/mlp.hpp"
#include "weakshot/similarity.hpp"
#include "weakshot/train_config.hpp"

namespace weakshot {

struct ClassifierModel {
  MlpParams backbone;        // D -> E, the embedding h(x)
  MlpParams head;            // E -> C logits
  std::vector<int> classes;  // class index -> category id, sorted
};

ClassifierModel make_classifier(std::size_t input_dim, std::size_t embed_dim,
                                const std::vector<int>& classes, Rng& rng);

struct WeightedCeResult {
  double loss = 0.0;
  Matrix dlogits;
};

// (1/M) * sum_m -w_m * log softmax(logits_m)[y_m]
WeightedCeResult weighted_ce_loss(const Matrix& logits, std::span<const int> labels,
                                  std::span<const double> weights);

struct GraphRegResult {
  double raw = 0.0;         // sum_ij s_ij * ||h_i - h_j||^2
  double normalized = 0.0;  // raw / M^2, the value alpha multiplies
  Matrix dembeddings;       // gradient of the normalized value
};

// The similarity matrix is treated as a fixed adjacency; no gradient flows into it.
GraphRegResult graph_reg_loss(const Matrix& embeddings, const SimilarityMatrix& s);

// Inverse-frequency per-category multipliers, normalized to unit mean.
std::vector<double> class_balance_weights(std::span<const std::size_t> per_category_counts);

// Produces the frozen similarity matrix for a mini-batch. `rows` are the indices of
// the batch samples within the training set (novel rows first, then base rows),
// letting oracle providers look up ground truth; model-based providers ignore them.
using SimilarityProvider =
    std::function<SimilarityMatrix(const Matrix& batch_features, std::span<const std::size_t> rows)>;

struct ClsEpochStats {
  double l_cls_w = 0.0;
  double l_reg_raw = 0.0;
  double l_reg_norm = 0.0;
  double l_full = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;  // nan when no test view is supplied
};

struct ClsTrainResult {
  ClassifierModel model;
  std::vector<ClsEpochStats> epochs;
};

// Weak-shot mode trains on novel_train alone; generalized mode unions base_train
// (weights fixed at 1) and applies unit-mean class-balance multipliers to every sample.
ClsTrainResult train_classifier(const DataView& novel_train, std::span<const double> novel_weights,
                                const SimilarityProvider* similarity, const TrainConfig& cfg,
                                const DataView* base_train = nullptr,
                                const DataView* test = nullptr);

double evaluate_accuracy(const ClassifierModel& model, const DataView& test);

}  // namespace weakshot
