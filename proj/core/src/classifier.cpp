#include "weakshot/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "weakshot/errors.hpp"
#include "weakshot/losses.hpp"
#include "weakshot/sgd.hpp"

namespace weakshot {

ClassifierModel make_classifier(std::size_t input_dim, std::size_t embed_dim,
                                const std::vector<int>& classes, Rng& rng) {
  if (classes.empty()) throw config_error("classifier: empty class list");
  if (!std::is_sorted(classes.begin(), classes.end()))
    throw config_error("classifier: class list must be sorted");
  ClassifierModel m;
  m.backbone = make_mlp({input_dim, embed_dim}, {Activation::relu});
  m.head = make_mlp({embed_dim, classes.size()}, {Activation::identity});
  m.classes = classes;
  glorot_init(m.backbone, rng);
  glorot_init(m.head, rng);
  return m;
}

WeightedCeResult weighted_ce_loss(const Matrix& logits, std::span<const int> labels,
                                  std::span<const double> weights) {
  if (weights.size() != logits.rows)
    throw shape_error("weighted_ce_loss: weights length must match batch size");
  for (double w : weights)
    if (!(w >= 0.0)) throw numeric_error("weighted_ce_loss: weights must be >= 0");

  const SoftmaxCeResult ce = softmax_ce(logits, labels);  // dlogits is for the mean loss
  WeightedCeResult r;
  r.dlogits = ce.dlogits;
  const double inv_b = 1.0 / static_cast<double>(logits.rows);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.rows; ++i) {
    sum += weights[i] * ce.per_sample_loss[i];
    double* row = r.dlogits.row(i);
    for (std::size_t j = 0; j < logits.cols; ++j) row[j] *= weights[i];
  }
  r.loss = sum * inv_b;
  return r;
}

GraphRegResult graph_reg_loss(const Matrix& embeddings, const SimilarityMatrix& s) {
  const std::size_t m = embeddings.rows, e = embeddings.cols;
  if (s.values.rows != m || s.values.cols != m)
    throw shape_error("graph_reg_loss: similarity matrix must be MxM for M embeddings");

  GraphRegResult r;
  double raw = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* hi = embeddings.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double sij = s.values(i, j);
      if (sij == 0.0) continue;
      const double* hj = embeddings.row(j);
      double d2 = 0.0;
      for (std::size_t k = 0; k < e; ++k) {
        const double diff = hi[k] - hj[k];
        d2 += diff * diff;
      }
      raw += sij * d2;
    }
  }
  const double m2 = static_cast<double>(m) * static_cast<double>(m);
  r.raw = raw;
  r.normalized = raw / m2;

  // d(normalized)/dh_i = (2/M^2) * sum_j (s_ij + s_ji) * (h_i - h_j)
  r.dembeddings = Matrix(m, e);
  for (std::size_t i = 0; i < m; ++i) {
    double* gi = r.dembeddings.row(i);
    const double* hi = embeddings.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double sij = s.values(i, j) + s.values(j, i);
      if (sij == 0.0) continue;
      const double* hj = embeddings.row(j);
      const double scale = 2.0 * sij / m2;
      for (std::size_t k = 0; k < e; ++k) gi[k] += scale * (hi[k] - hj[k]);
    }
  }
  return r;
}

std::vector<double> class_balance_weights(std::span<const std::size_t> per_category_counts) {
  if (per_category_counts.empty()) throw config_error("class_balance_weights: no categories");
  bool all_equal = true;
  for (std::size_t n : per_category_counts) {
    if (n == 0) throw config_error("class_balance_weights: zero-count category");
    if (n != per_category_counts[0]) all_equal = false;
  }
  // Equal counts give exactly 1.0; computing through the mean would add rounding noise.
  if (all_equal) return std::vector<double>(per_category_counts.size(), 1.0);

  std::vector<double> inv(per_category_counts.size());
  double mean = 0.0;
  for (std::size_t c = 0; c < inv.size(); ++c) {
    inv[c] = 1.0 / static_cast<double>(per_category_counts[c]);
    mean += inv[c];
  }
  mean /= static_cast<double>(inv.size());
  for (double& v : inv) v /= mean;
  return inv;
}

namespace {

struct TrainArrays {
  Matrix features;
  std::vector<int> class_idx;
  std::vector<double> weights;
  std::vector<int> classes;
};

int class_index(const std::vector<int>& classes, int label, const char* where) {
  const auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label)
    throw config_error(std::string(where) + ": label " + std::to_string(label) +
                       " is not among the trained classes");
  return static_cast<int>(it - classes.begin());
}

TrainArrays assemble_training_set(const DataView& novel, std::span<const double> novel_weights,
                                  const DataView* base, Mode mode) {
  if (novel_weights.size() != novel.size())
    throw config_error("train_classifier: need one weight per novel training sample");
  if (mode == Mode::weakshot && base != nullptr && base->size() > 0)
    throw config_error("train_classifier: base training data requires generalized mode");

  const std::size_t n_base = base ? base->size() : 0;
  const std::size_t n = novel.size() + n_base;
  if (n == 0) throw config_error("train_classifier: empty training set");

  std::set<int> class_set(novel.labels.begin(), novel.labels.end());
  if (base) class_set.insert(base->labels.begin(), base->labels.end());

  TrainArrays a;
  a.classes.assign(class_set.begin(), class_set.end());
  a.features = Matrix(n, novel.features.cols);
  a.class_idx.resize(n);
  a.weights.resize(n);
  for (std::size_t i = 0; i < novel.size(); ++i) {
    const double* src = novel.features.row(i);
    std::copy(src, src + novel.features.cols, a.features.row(i));
    a.class_idx[i] = class_index(a.classes, novel.labels[i], "train_classifier");
    a.weights[i] = novel_weights[i];
  }
  for (std::size_t i = 0; i < n_base; ++i) {
    if (base->features.cols != novel.features.cols)
      throw shape_error("train_classifier: base and novel feature dimensions differ");
    const double* src = base->features.row(i);
    std::copy(src, src + novel.features.cols, a.features.row(novel.size() + i));
    a.class_idx[novel.size() + i] = class_index(a.classes, base->labels[i], "train_classifier");
    a.weights[novel.size() + i] = 1.0;  // base images are clean
  }

  if (mode == Mode::generalized) {
    std::vector<std::size_t> counts(a.classes.size(), 0);
    for (int ci : a.class_idx) ++counts[static_cast<std::size_t>(ci)];
    const std::vector<double> mult = class_balance_weights(counts);
    for (std::size_t i = 0; i < n; ++i)
      a.weights[i] *= mult[static_cast<std::size_t>(a.class_idx[i])];
  }
  return a;
}

double accuracy_on(const ClassifierModel& model, const Matrix& features,
                   std::span<const int> class_idx) {
  const MlpActivations emb = mlp_forward(model.backbone, features);
  const MlpActivations logits = mlp_forward(model.head, emb.output());
  const Matrix& out = logits.output();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < out.rows; ++i) {
    const double* row = out.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < out.cols; ++j)
      if (row[j] > row[best]) best = j;  // ties keep the lowest index
    if (static_cast<int>(best) == class_idx[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(out.rows);
}

}  // namespace

ClsTrainResult train_classifier(const DataView& novel_train, std::span<const double> novel_weights,
                                const SimilarityProvider* similarity, const TrainConfig& cfg,
                                const DataView* base_train, const DataView* test) {
  cfg.validate();
  if (cfg.use_reg && similarity == nullptr)
    throw config_error("train_classifier: graph regularization needs a similarity provider");

  const TrainArrays arrays =
      assemble_training_set(novel_train, novel_weights, base_train, cfg.mode);

  ClsTrainResult result;
  Rng rng_init(derive_seed(cfg.seed, "classifier-init"));
  result.model =
      make_classifier(arrays.features.cols, cfg.cls_embed_dim, arrays.classes, rng_init);

  std::vector<int> test_idx;
  if (test) {
    if (test->size() == 0) throw config_error("train_classifier: empty test view");
    test_idx.resize(test->size());
    for (std::size_t i = 0; i < test->size(); ++i)
      test_idx[i] = class_index(arrays.classes, test->labels[i], "train_classifier test view");
  }

  SgdState opt_bb =
      SgdState::for_params(result.model.backbone, cfg.cls_lr, cfg.momentum, cfg.weight_decay);
  SgdState opt_head =
      SgdState::for_params(result.model.head, cfg.cls_lr, cfg.momentum, cfg.weight_decay);

  Rng rng_batches(derive_seed(cfg.seed, "classifier-batches"));
  std::vector<std::size_t> order(arrays.features.rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t epoch = 0; epoch < cfg.cls_epochs; ++epoch) {
    rng_batches.shuffle(order);
    double sum_cls = 0.0, sum_raw = 0.0, sum_norm = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.cls_batch) {
      const std::size_t b = std::min(cfg.cls_batch, order.size() - start);
      Matrix x(b, arrays.features.cols);
      std::vector<int> y(b);
      std::vector<double> w(b);
      std::vector<std::size_t> rows(b);
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t src_row = order[start + i];
        const double* src = arrays.features.row(src_row);
        std::copy(src, src + x.cols, x.row(i));
        y[i] = arrays.class_idx[src_row];
        w[i] = arrays.weights[src_row];
        rows[i] = src_row;
      }

      const MlpActivations acts_bb = mlp_forward(result.model.backbone, x);
      const MlpActivations acts_head = mlp_forward(result.model.head, acts_bb.output());
      const WeightedCeResult ce = weighted_ce_loss(acts_head.output(), y, w);
      sum_cls += ce.loss;

      MlpBackwardResult head_back = mlp_backward(result.model.head, acts_head, ce.dlogits);
      Matrix demb = std::move(head_back.input_grad);

      if (cfg.use_reg) {
        const SimilarityMatrix s = (*similarity)(x, rows);
        const GraphRegResult reg = graph_reg_loss(acts_bb.output(), s);
        sum_raw += reg.raw;
        sum_norm += reg.normalized;
        if (cfg.alpha != 0.0)
          for (std::size_t p = 0; p < demb.size(); ++p)
            demb.data[p] += cfg.alpha * reg.dembeddings.data[p];
      }

      const MlpBackwardResult bb_back = mlp_backward(result.model.backbone, acts_bb, demb);
      sgd_step(result.model.head, head_back.grads, opt_head);
      sgd_step(result.model.backbone, bb_back.grads, opt_bb);
      ++n_batches;
    }

    ClsEpochStats st;
    const double inv = 1.0 / static_cast<double>(n_batches);
    st.l_cls_w = sum_cls * inv;
    st.l_reg_raw = cfg.use_reg ? sum_raw * inv : 0.0;
    st.l_reg_norm = cfg.use_reg ? sum_norm * inv : 0.0;
    st.l_full = st.l_cls_w + cfg.alpha * st.l_reg_norm;
    st.train_acc = accuracy_on(result.model, arrays.features, arrays.class_idx);
    st.test_acc = test ? accuracy_on(result.model, test->features, test_idx) : nan;
    result.epochs.push_back(st);
  }
  return result;
}

double evaluate_accuracy(const ClassifierModel& model, const DataView& test) {
  if (test.size() == 0) throw config_error("evaluate_accuracy: empty test set");
  std::vector<int> idx(test.size());
  for (std::size_t i = 0; i < test.size(); ++i)
    idx[i] = class_index(model.classes, test.labels[i], "evaluate_accuracy");
  return accuracy_on(model, test.features, idx);
}

}  // namespace weakshot
