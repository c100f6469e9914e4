#include "weakshot/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weakshot/errors.hpp"
#include "weakshot/losses.hpp"
#include "weakshot/sgd.hpp"

namespace weakshot {

SimNetModel make_simnet(std::size_t input_dim, std::size_t embed_dim, std::size_t relation_dim,
                        Rng& rng) {
  SimNetModel m;
  m.backbone = make_mlp({input_dim, embed_dim}, {Activation::relu});
  m.relation_fc = make_mlp({2 * embed_dim, relation_dim}, {Activation::relu});
  m.score_head = make_mlp({relation_dim, 1}, {Activation::sigmoid});
  glorot_init(m.backbone, rng);
  glorot_init(m.relation_fc, rng);
  glorot_init(m.score_head, rng);
  return m;
}

Discriminator make_discriminator(std::size_t relation_dim, std::size_t hidden, Rng& rng) {
  Discriminator d;
  d.net = make_mlp({relation_dim, hidden, 1}, {Activation::relu, Activation::sigmoid});
  glorot_init(d.net, rng);
  return d;
}

BatchShape clamp_batch_shape(const DataView& view, std::size_t c_m, std::size_t m) {
  if (c_m < 1 || m < 1 || m % c_m != 0)
    throw config_error("batch shape: c_m must be >= 1 and divide m");
  if (view.by_category.empty()) throw sampling_error("batch shape: view has no records");
  BatchShape s;
  s.c_m = std::min(c_m, view.by_category.size());
  const std::size_t per = std::min(m / s.c_m, view.min_category_count());
  if (per < 1) throw sampling_error("batch shape: a category in the view is empty");
  s.m = s.c_m * per;
  return s;
}

PairBatch sample_balanced_batch(const DataView& view, std::size_t c_m, std::size_t m, Rng& rng) {
  if (c_m < 1 || m < 1 || m % c_m != 0)
    throw config_error("balanced batch: c_m must be >= 1 and divide m");
  const std::size_t per = m / c_m;
  if (view.by_category.size() < c_m)
    throw sampling_error("balanced batch: need " + std::to_string(c_m) + " categories, view has " +
                         std::to_string(view.by_category.size()));

  std::vector<int> cats;
  cats.reserve(view.by_category.size());
  for (const auto& [cat, rows] : view.by_category) cats.push_back(cat);

  std::vector<std::size_t> picked_rows;
  picked_rows.reserve(m);
  PairBatch batch;
  for (std::size_t ci : rng.sample_without_replacement(cats.size(), c_m)) {
    const int cat = cats[ci];
    batch.categories.push_back(cat);
    const std::vector<std::size_t>& rows = view.by_category.at(cat);
    if (rows.size() < per)
      throw sampling_error("balanced batch: category " + std::to_string(cat) + " has " +
                           std::to_string(rows.size()) + " images, need " + std::to_string(per));
    for (std::size_t k : rng.sample_without_replacement(rows.size(), per))
      picked_rows.push_back(rows[k]);
  }
  rng.shuffle(picked_rows);

  batch.features = Matrix(m, view.features.cols);
  batch.labels.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* src = view.features.row(picked_rows[i]);
    std::copy(src, src + view.features.cols, batch.features.row(i));
    batch.labels[i] = view.labels[picked_rows[i]];
  }
  return batch;
}

Matrix pair_label_matrix(const std::vector<int>& labels) {
  const std::size_t m = labels.size();
  Matrix c(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) c(i, j) = labels[i] == labels[j] ? 1.0 : 0.0;
  return c;
}

Matrix offdiag_mask(std::size_t m) {
  Matrix mask(m, m, 1.0);
  for (std::size_t i = 0; i < m; ++i) mask(i, i) = 0.0;
  return mask;
}

Matrix enumerate_pairs(const Matrix& embeddings) {
  const std::size_t m = embeddings.rows, e = embeddings.cols;
  Matrix out(m * m, 2 * e);
  for (std::size_t i = 0; i < m; ++i) {
    const double* ei = embeddings.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      double* dst = out.row(i * m + j);
      std::copy(ei, ei + e, dst);
      const double* ej = embeddings.row(j);
      std::copy(ej, ej + e, dst + e);
    }
  }
  return out;
}

Matrix fold_pair_grad(const Matrix& pair_grad, std::size_t m, std::size_t embed_dim) {
  if (pair_grad.rows != m * m || pair_grad.cols != 2 * embed_dim)
    throw shape_error("fold_pair_grad: gradient shape does not match m and embed_dim");
  Matrix out(m, embed_dim);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double* g = pair_grad.row(i * m + j);
      double* gi = out.row(i);
      double* gj = out.row(j);
      for (std::size_t d = 0; d < embed_dim; ++d) {
        gi[d] += g[d];
        gj[d] += g[embed_dim + d];
      }
    }
  }
  return out;
}

RelationForward relation_forward(const SimNetModel& model, const Matrix& features) {
  RelationForward rf;
  rf.backbone_acts = mlp_forward(model.backbone, features);
  rf.pair_input = enumerate_pairs(rf.backbone_acts.output());
  rf.relation_acts = mlp_forward(model.relation_fc, rf.pair_input);
  rf.head_acts = mlp_forward(model.score_head, rf.relation_acts.output());
  const std::size_t m = features.rows;
  rf.scores = Matrix(m, m);
  const Matrix& out = rf.head_acts.output();
  for (std::size_t p = 0; p < m * m; ++p) rf.scores.data[p] = out(p, 0);
  return rf;
}

Matrix pair_scores(const SimNetModel& model, const Matrix& features, std::size_t tile) {
  if (tile < 1) throw config_error("pair_scores: tile must be >= 1");
  const MlpActivations emb_acts = mlp_forward(model.backbone, features);
  const Matrix& emb = emb_acts.output();
  const std::size_t n = emb.rows, e = emb.cols;
  Matrix scores(n, n);
  for (std::size_t i0 = 0; i0 < n; i0 += tile) {
    const std::size_t ib = std::min(tile, n - i0);
    for (std::size_t j0 = 0; j0 < n; j0 += tile) {
      const std::size_t jb = std::min(tile, n - j0);
      Matrix block(ib * jb, 2 * e);
      for (std::size_t di = 0; di < ib; ++di) {
        const double* ei = emb.row(i0 + di);
        for (std::size_t dj = 0; dj < jb; ++dj) {
          double* dst = block.row(di * jb + dj);
          std::copy(ei, ei + e, dst);
          const double* ej = emb.row(j0 + dj);
          std::copy(ej, ej + e, dst + e);
        }
      }
      const MlpActivations rel = mlp_forward(model.relation_fc, block);
      const MlpActivations head = mlp_forward(model.score_head, rel.output());
      const Matrix& out = head.output();
      for (std::size_t di = 0; di < ib; ++di)
        for (std::size_t dj = 0; dj < jb; ++dj)
          scores(i0 + di, j0 + dj) = out(di * jb + dj, 0);
    }
  }
  return scores;
}

RelationLossResult relation_loss(const Matrix& scores, const Matrix& pair_labels,
                                 const Matrix& mask) {
  check_same_shape(scores, pair_labels, "relation_loss");
  check_same_shape(scores, mask, "relation_loss");
  std::size_t n_active = 0;
  for (double v : mask.data)
    if (v != 0.0) ++n_active;
  if (n_active == 0) throw config_error("relation_loss: mask selects no pairs");

  RelationLossResult r;
  r.n_active = n_active;
  r.dscores = Matrix(scores.rows, scores.cols);
  double sum = 0.0;
  const double inv = 1.0 / static_cast<double>(n_active);
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (mask.data[p] == 0.0) continue;
    const BinaryCeResult bce = binary_ce(scores.data[p], pair_labels.data[p] != 0.0 ? 1 : 0);
    sum += bce.loss;
    r.dscores.data[p] = bce.dscore * inv;
  }
  r.loss = sum * inv;
  return r;
}

namespace {

// Discriminator objective over one base and one novel pair set:
//   l_d = mean log(1 - D(r_base)) + mean log D(r_novel)
// Descending l_d drives D toward 1 on base pairs and 0 on novel pairs.
struct DiscEval {
  MlpActivations acts_base, acts_novel;
  double l_d = 0.0;
  Matrix dout_base, dout_novel;  // d l_d / d D-output
};

DiscEval eval_disc(const MlpParams& disc, const Matrix& rel_base, const Matrix& rel_novel) {
  DiscEval ev;
  ev.acts_base = mlp_forward(disc, rel_base);
  ev.acts_novel = mlp_forward(disc, rel_novel);
  const Matrix& ob = ev.acts_base.output();
  const Matrix& on = ev.acts_novel.output();
  const double nb = static_cast<double>(ob.rows), nn = static_cast<double>(on.rows);
  ev.dout_base = Matrix(ob.rows, 1);
  ev.dout_novel = Matrix(on.rows, 1);
  double sum_b = 0.0, sum_n = 0.0;
  for (std::size_t i = 0; i < ob.rows; ++i) {
    const double d = std::clamp(ob(i, 0), kProbEps, 1.0 - kProbEps);
    sum_b += std::log(1.0 - d);
    ev.dout_base(i, 0) = -1.0 / (1.0 - d) / nb;
  }
  for (std::size_t i = 0; i < on.rows; ++i) {
    const double d = std::clamp(on(i, 0), kProbEps, 1.0 - kProbEps);
    sum_n += std::log(d);
    ev.dout_novel(i, 0) = 1.0 / d / nn;
  }
  ev.l_d = sum_b / nb + sum_n / nn;
  return ev;
}

MlpGrads disc_grads_from_eval(const MlpParams& disc, const DiscEval& ev) {
  MlpBackwardResult back_b = mlp_backward(disc, ev.acts_base, ev.dout_base);
  const MlpBackwardResult back_n = mlp_backward(disc, ev.acts_novel, ev.dout_novel);
  back_b.grads.accumulate_scaled(back_n.grads, 1.0);
  return std::move(back_b.grads);
}

Matrix scaled(const Matrix& m, double s) {
  Matrix out = m;
  for (double& v : out.data) v *= s;
  return out;
}

struct GenResult {
  double l_g = 0.0;
  double relation_ce = 0.0;
  SimNetGrads grads;
};

// Generator-side losses and gradients with the discriminator frozen.
// rf_novel/disc may be null; beta == 0 skips the adversarial path entirely so the
// parameter trajectory is bit-identical to plain relation-CE training.
GenResult generator_grads(const SimNetModel& model, const Discriminator* disc,
                          const RelationForward& rf_base, const RelationForward* rf_novel,
                          const Matrix& pair_labels, const Matrix& mask, double beta) {
  GenResult out;
  const std::size_t mb = rf_base.scores.rows;
  const std::size_t e = model.embed_dim();

  const RelationLossResult rl = relation_loss(rf_base.scores, pair_labels, mask);
  out.relation_ce = rl.loss;
  out.l_g = rl.loss;

  Matrix dhead_out(mb * mb, 1);
  for (std::size_t p = 0; p < mb * mb; ++p) dhead_out(p, 0) = rl.dscores.data[p];
  MlpBackwardResult head_back = mlp_backward(model.score_head, rf_base.head_acts, dhead_out);
  out.grads.score_head = std::move(head_back.grads);
  Matrix drel_base = std::move(head_back.input_grad);

  Matrix drel_novel;
  const bool adversarial = disc != nullptr && rf_novel != nullptr && beta != 0.0;
  if (adversarial) {
    const DiscEval ev =
        eval_disc(disc->net, rf_base.relation_features(), rf_novel->relation_features());
    out.l_g += -beta * ev.l_d;
    const MlpBackwardResult adv_b =
        mlp_backward(disc->net, ev.acts_base, scaled(ev.dout_base, -beta));
    for (std::size_t p = 0; p < drel_base.size(); ++p)
      drel_base.data[p] += adv_b.input_grad.data[p];
    MlpBackwardResult adv_n =
        mlp_backward(disc->net, ev.acts_novel, scaled(ev.dout_novel, -beta));
    drel_novel = std::move(adv_n.input_grad);
  }

  MlpBackwardResult rel_back = mlp_backward(model.relation_fc, rf_base.relation_acts, drel_base);
  out.grads.relation_fc = std::move(rel_back.grads);
  const Matrix demb_base = fold_pair_grad(rel_back.input_grad, mb, e);
  MlpBackwardResult bb_back = mlp_backward(model.backbone, rf_base.backbone_acts, demb_base);
  out.grads.backbone = std::move(bb_back.grads);

  if (adversarial) {
    const std::size_t mn = rf_novel->scores.rows;
    const MlpBackwardResult rel_back_n =
        mlp_backward(model.relation_fc, rf_novel->relation_acts, drel_novel);
    out.grads.relation_fc.accumulate_scaled(rel_back_n.grads, 1.0);
    const Matrix demb_novel = fold_pair_grad(rel_back_n.input_grad, mn, e);
    const MlpBackwardResult bb_back_n =
        mlp_backward(model.backbone, rf_novel->backbone_acts, demb_novel);
    out.grads.backbone.accumulate_scaled(bb_back_n.grads, 1.0);
  }
  return out;
}

// Trains a throwaway softmax classifier on the (noisy) novel set and keeps its
// backbone as the SimNet initialization.
void pretrain_backbone(SimNetModel& model, const DataView& novel, const TrainConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, "simnet-pretrain"));
  std::vector<int> classes;
  for (const auto& [cat, rows] : novel.by_category) classes.push_back(cat);
  MlpParams head = make_mlp({model.embed_dim(), classes.size()}, {Activation::identity});
  glorot_init(head, rng);

  std::vector<int> y(novel.size());
  for (std::size_t i = 0; i < novel.size(); ++i) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), novel.labels[i]);
    y[i] = static_cast<int>(it - classes.begin());
  }

  SgdState opt_bb = SgdState::for_params(model.backbone, cfg.cls_lr, cfg.momentum, cfg.weight_decay);
  SgdState opt_head = SgdState::for_params(head, cfg.cls_lr, cfg.momentum, cfg.weight_decay);

  std::vector<std::size_t> order(novel.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 0; epoch < cfg.sim_pretrain_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.cls_batch) {
      const std::size_t b = std::min(cfg.cls_batch, order.size() - start);
      Matrix x(b, novel.features.cols);
      std::vector<int> yb(b);
      for (std::size_t i = 0; i < b; ++i) {
        const double* src = novel.features.row(order[start + i]);
        std::copy(src, src + novel.features.cols, x.row(i));
        yb[i] = y[order[start + i]];
      }
      const MlpActivations acts_bb = mlp_forward(model.backbone, x);
      const MlpActivations acts_head = mlp_forward(head, acts_bb.output());
      const SoftmaxCeResult ce = softmax_ce(acts_head.output(), yb);
      MlpBackwardResult head_back = mlp_backward(head, acts_head, ce.dlogits);
      const MlpBackwardResult bb_back =
          mlp_backward(model.backbone, acts_bb, head_back.input_grad);
      sgd_step(head, head_back.grads, opt_head);
      sgd_step(model.backbone, bb_back.grads, opt_bb);
    }
  }
}

}  // namespace

AdvLossResult adversarial_losses(const SimNetModel& model, const Discriminator& disc,
                                 const PairBatch& base_batch, const PairBatch& novel_batch,
                                 double beta) {
  const RelationForward rf_b = relation_forward(model, base_batch.features);
  const RelationForward rf_n = relation_forward(model, novel_batch.features);
  const Matrix labels = pair_label_matrix(base_batch.labels);
  const Matrix mask = offdiag_mask(base_batch.size());

  AdvLossResult r;
  const DiscEval ev = eval_disc(disc.net, rf_b.relation_features(), rf_n.relation_features());
  r.l_d = ev.l_d;
  r.disc_grads = disc_grads_from_eval(disc.net, ev);

  GenResult g = generator_grads(model, &disc, rf_b, &rf_n, labels, mask, beta);
  r.l_g = g.l_g;
  r.relation_ce = g.relation_ce;
  r.model_grads = std::move(g.grads);
  return r;
}

SimTrainResult train_simnet(const DataView& base_train, const DataView* novel_train,
                            const TrainConfig& cfg) {
  cfg.validate();
  if (base_train.size() == 0) throw sampling_error("train_simnet: empty training view");

  SimTrainResult result;
  result.adversarial = novel_train != nullptr;

  Rng rng_init(derive_seed(cfg.seed, "simnet-init"));
  result.model = make_simnet(base_train.features.cols, cfg.sim_embed_dim, cfg.sim_relation_dim,
                             rng_init);
  if (result.adversarial && cfg.sim_pretrain_backbone)
    pretrain_backbone(result.model, *novel_train, cfg);

  const BatchShape shape_b = clamp_batch_shape(base_train, cfg.sim_cm, cfg.sim_batch);
  Rng rng_batches(derive_seed(cfg.seed, "simnet-batches"));
  SgdState opt_bb =
      SgdState::for_params(result.model.backbone, cfg.sim_lr, cfg.momentum, cfg.weight_decay);
  SgdState opt_rel =
      SgdState::for_params(result.model.relation_fc, cfg.sim_lr, cfg.momentum, cfg.weight_decay);
  SgdState opt_head =
      SgdState::for_params(result.model.score_head, cfg.sim_lr, cfg.momentum, cfg.weight_decay);

  BatchShape shape_n;
  Rng rng_novel(0);
  SgdState opt_disc;
  if (result.adversarial) {
    Rng rng_disc(derive_seed(cfg.seed, "disc-init"));
    result.disc = make_discriminator(cfg.sim_relation_dim, cfg.disc_hidden, rng_disc);
    shape_n = clamp_batch_shape(*novel_train, cfg.sim_cm, cfg.sim_batch);
    rng_novel = Rng(derive_seed(cfg.seed, "simnet-novel-batches"));
    opt_disc = SgdState::for_params(result.disc.net, cfg.sim_lr, cfg.momentum, cfg.weight_decay);
  }

  // Episodic training has no natural data pass; one epoch covers the ordered
  // pair space instead (N^2 pairs, M^2 per episode).
  const std::size_t n = base_train.size();
  const std::size_t iters =
      std::max<std::size_t>(1, (n * n) / (cfg.sim_batch * cfg.sim_batch));
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t epoch = 0; epoch < cfg.sim_epochs; ++epoch) {
    double sum_ce = 0.0, sum_ld = 0.0, sum_lg = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
      const PairBatch bb = sample_balanced_batch(base_train, shape_b.c_m, shape_b.m, rng_batches);
      const Matrix labels = pair_label_matrix(bb.labels);
      const Matrix mask = offdiag_mask(bb.size());
      const RelationForward rf_b = relation_forward(result.model, bb.features);

      if (!result.adversarial) {
        const GenResult g =
            generator_grads(result.model, nullptr, rf_b, nullptr, labels, mask, 0.0);
        sgd_step(result.model.backbone, g.grads.backbone, opt_bb);
        sgd_step(result.model.relation_fc, g.grads.relation_fc, opt_rel);
        sgd_step(result.model.score_head, g.grads.score_head, opt_head);
        sum_ce += g.relation_ce;
      } else {
        const PairBatch nb = sample_balanced_batch(*novel_train, shape_n.c_m, shape_n.m, rng_novel);
        const RelationForward rf_n = relation_forward(result.model, nb.features);

        const DiscEval ev =
            eval_disc(result.disc.net, rf_b.relation_features(), rf_n.relation_features());
        sgd_step(result.disc.net, disc_grads_from_eval(result.disc.net, ev), opt_disc);
        sum_ld += ev.l_d;

        // Generator step against the just-updated discriminator.
        const GenResult g =
            generator_grads(result.model, &result.disc, rf_b, &rf_n, labels, mask, cfg.beta);
        sgd_step(result.model.backbone, g.grads.backbone, opt_bb);
        sgd_step(result.model.relation_fc, g.grads.relation_fc, opt_rel);
        sgd_step(result.model.score_head, g.grads.score_head, opt_head);
        sum_ce += g.relation_ce;
        sum_lg += g.l_g;
      }
    }
    SimEpochStats stats;
    stats.relation_ce = sum_ce / static_cast<double>(iters);
    stats.l_d = result.adversarial ? sum_ld / static_cast<double>(iters) : nan;
    stats.l_g = result.adversarial ? sum_lg / static_cast<double>(iters) : nan;
    result.epochs.push_back(stats);
  }
  return result;
}

PairMetrics eval_pairs(const PairScorer& scorer, const DataView& test, std::size_t c_m,
                       std::size_t m, std::size_t n_batches, Rng& rng) {
  if (n_batches < 1) throw config_error("eval_pairs: need at least one batch");
  PairMetrics total;
  for (std::size_t k = 0; k < n_batches; ++k) {
    const PairBatch batch = sample_balanced_batch(test, c_m, m, rng);
    const Matrix scores = scorer(batch);
    if (scores.rows != m || scores.cols != m)
      throw shape_error("eval_pairs: scorer returned a matrix of the wrong shape");

    std::size_t tp_s = 0, fp_s = 0, fn_s = 0, tn_s = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const bool same = batch.labels[i] == batch.labels[j];
        const bool pred = scores(i, j) >= 0.5;
        if (pred && same) ++tp_s;
        else if (pred && !same) ++fp_s;
        else if (!pred && same) ++fn_s;
        else ++tn_s;
      }

    auto metrics = [](std::size_t tp, std::size_t fp, std::size_t fn) {
      ClassMetrics cm;
      cm.precision = tp + fp == 0 ? 0.0 : 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
      cm.recall = tp + fn == 0 ? 0.0 : 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
      cm.f1 = cm.precision + cm.recall == 0.0
                  ? 0.0
                  : 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
      return cm;
    };
    const ClassMetrics sim = metrics(tp_s, fp_s, fn_s);
    const ClassMetrics dis = metrics(tn_s, fn_s, fp_s);  // dissimilar class swaps roles
    total.similar.precision += sim.precision;
    total.similar.recall += sim.recall;
    total.similar.f1 += sim.f1;
    total.dissimilar.precision += dis.precision;
    total.dissimilar.recall += dis.recall;
    total.dissimilar.f1 += dis.f1;
  }
  const double inv = 1.0 / static_cast<double>(n_batches);
  for (ClassMetrics* cm : {&total.similar, &total.dissimilar}) {
    cm->precision *= inv;
    cm->recall *= inv;
    cm->f1 *= inv;
  }
  return total;
}

PairMetrics eval_pairs(const SimNetModel& model, const DataView& test, std::size_t c_m,
                       std::size_t m, std::size_t n_batches, Rng& rng) {
  return eval_pairs(
      [&model](const PairBatch& batch) { return pair_scores(model, batch.features); }, test, c_m,
      m, n_batches, rng);
}

PairMetrics analytic_random_metrics(double similar_rate) {
  if (similar_rate <= 0.0 || similar_rate >= 1.0)
    throw config_error("analytic_random_metrics: rate must be in (0, 1)");
  auto one = [](double rate) {
    ClassMetrics cm;
    cm.precision = 100.0 * rate;
    cm.recall = 50.0;
    cm.f1 = 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
    return cm;
  };
  PairMetrics pm;
  pm.similar = one(similar_rate);
  pm.dissimilar = one(1.0 - similar_rate);
  return pm;
}

SimilarityMatrix baseline_similarity(const Matrix& embeddings, BaselineKind kind) {
  if (embeddings.rows == 0) throw shape_error("baseline_similarity: empty embeddings");
  const std::size_t n = embeddings.rows, e = embeddings.cols;
  SimilarityMatrix s;
  s.values = Matrix(n, n);
  if (kind == BaselineKind::euclidean) {
    s.source = SimilaritySource::euclidean;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double d2 = 0.0;
        const double* a = embeddings.row(i);
        const double* b = embeddings.row(j);
        for (std::size_t k = 0; k < e; ++k) {
          const double diff = a[k] - b[k];
          d2 += diff * diff;
        }
        s.values(i, j) = 1.0 / (std::sqrt(d2) + 1e-6);
      }
  } else {
    s.source = SimilaritySource::cosine;
    std::vector<double> norm(n);
    for (std::size_t i = 0; i < n; ++i) {
      double d2 = 0.0;
      const double* a = embeddings.row(i);
      for (std::size_t k = 0; k < e; ++k) d2 += a[k] * a[k];
      if (d2 == 0.0)
        throw numeric_error("baseline_similarity: zero-norm vector at row " + std::to_string(i));
      norm[i] = std::sqrt(d2);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0.0;
        const double* a = embeddings.row(i);
        const double* b = embeddings.row(j);
        for (std::size_t k = 0; k < e; ++k) dot += a[k] * b[k];
        s.values(i, j) = std::max(0.0, dot / (norm[i] * norm[j]));
      }
  }
  return s;
}

}  // namespace weakshot
