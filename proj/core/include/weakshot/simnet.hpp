#pragma once

#include <functional>
#include <vector>

#include "weakshot/dataset.hpp"
#include "weakshot/mlp.hpp"
#include "weakshot/rng.hpp"
#include "weakshot/similarity.hpp"
#include "weakshot/train_config.hpp"

namespace weakshot {

// backbone -> pair enumeration -> relation feature -> sigmoid score.
struct SimNetModel {
  MlpParams backbone;     // D -> E
  MlpParams relation_fc;  // 2E -> R
  MlpParams score_head;   // R -> 1

  std::size_t input_dim() const { return backbone.input_dim(); }
  std::size_t embed_dim() const { return backbone.output_dim(); }
  std::size_t relation_dim() const { return relation_fc.output_dim(); }
};

SimNetModel make_simnet(std::size_t input_dim, std::size_t embed_dim, std::size_t relation_dim,
                        Rng& rng);

// Scores the probability that a relation feature came from the clean-labeled side.
struct Discriminator {
  MlpParams net;  // R -> hidden -> 1
};

Discriminator make_discriminator(std::size_t relation_dim, std::size_t hidden, Rng& rng);

struct PairBatch {
  Matrix features;            // M x D
  std::vector<int> labels;    // M
  std::vector<int> categories;  // the distinct ids drawn, in draw order

  std::size_t size() const { return features.rows; }
};

struct BatchShape {
  std::size_t c_m = 0;
  std::size_t m = 0;
};

// Largest (c_m, m) not exceeding the targets that the view can satisfy, keeping
// m / c_m images per category. Throws sampling_error if the view supports none.
BatchShape clamp_batch_shape(const DataView& view, std::size_t c_m, std::size_t m);

PairBatch sample_balanced_batch(const DataView& view, std::size_t c_m, std::size_t m, Rng& rng);

Matrix pair_label_matrix(const std::vector<int>& labels);  // 1 = same category
Matrix offdiag_mask(std::size_t m);                        // ones with a zero diagonal
Matrix enumerate_pairs(const Matrix& embeddings);          // row i*M+j = concat(e_i, e_j)
// Adjoint of enumerate_pairs: folds a M^2 x 2E gradient back onto the M x E embeddings.
Matrix fold_pair_grad(const Matrix& pair_grad, std::size_t m, std::size_t embed_dim);

struct RelationForward {
  MlpActivations backbone_acts;
  Matrix pair_input;             // M^2 x 2E
  MlpActivations relation_acts;  // over pair_input
  MlpActivations head_acts;      // over relation features
  Matrix scores;                 // M x M

  const Matrix& embeddings() const { return backbone_acts.output(); }
  const Matrix& relation_features() const { return relation_acts.output(); }
};

RelationForward relation_forward(const SimNetModel& model, const Matrix& features);

// Inference-only pair scores, computed in row tiles to bound memory.
// Tiling never changes the result.
Matrix pair_scores(const SimNetModel& model, const Matrix& features, std::size_t tile = 64);

struct RelationLossResult {
  double loss = 0.0;
  Matrix dscores;  // zero where masked out
  std::size_t n_active = 0;
};

// Mean binary cross-entropy over the pairs selected by mask.
RelationLossResult relation_loss(const Matrix& scores, const Matrix& pair_labels,
                                 const Matrix& mask);

struct SimNetGrads {
  MlpGrads backbone, relation_fc, score_head;
};

struct AdvLossResult {
  double l_d = 0.0;          // discriminator objective (it descends this)
  double l_g = 0.0;          // -beta * l_d + relation CE (the generator descends this)
  double relation_ce = 0.0;
  MlpGrads disc_grads;       // d l_d / d disc params, generator frozen
  SimNetGrads model_grads;   // d l_g / d model params, discriminator frozen
};

AdvLossResult adversarial_losses(const SimNetModel& model, const Discriminator& disc,
                                 const PairBatch& base_batch, const PairBatch& novel_batch,
                                 double beta);

struct SimEpochStats {
  double relation_ce = 0.0;
  double l_d = 0.0;  // nan when not adversarial
  double l_g = 0.0;  // nan when not adversarial
};

struct SimTrainResult {
  SimNetModel model;
  Discriminator disc;
  bool adversarial = false;
  std::vector<SimEpochStats> epochs;
};

// Alternating discriminator/generator updates when novel_train is supplied,
// plain relation-CE training otherwise.
SimTrainResult train_simnet(const DataView& base_train, const DataView* novel_train,
                            const TrainConfig& cfg);

struct ClassMetrics {
  double precision = 0.0, recall = 0.0, f1 = 0.0;  // percent
};

struct PairMetrics {
  ClassMetrics similar, dissimilar;
};

using PairScorer = std::function<Matrix(const PairBatch&)>;

PairMetrics eval_pairs(const PairScorer& scorer, const DataView& test, std::size_t c_m,
                       std::size_t m, std::size_t n_batches, Rng& rng);
PairMetrics eval_pairs(const SimNetModel& model, const DataView& test, std::size_t c_m,
                       std::size_t m, std::size_t n_batches, Rng& rng);

// Closed-form metrics of a fair-coin predictor at the given similar-pair base rate.
PairMetrics analytic_random_metrics(double similar_rate);

enum class BaselineKind { euclidean, cosine };

SimilarityMatrix baseline_similarity(const Matrix& embeddings, BaselineKind kind);

}  // namespace weakshot
