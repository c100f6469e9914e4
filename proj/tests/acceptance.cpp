// End-to-end acceptance gate. Each numbered check prints one PASS/FAIL line;
// the exit code is the number of failures. Heavy artifacts (trained similarity
// networks) are shared between checks, so the order of computation below does
// not match the numbering.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weakshot/classifier.hpp"
#include "weakshot/dataset.hpp"
#include "weakshot/denoise.hpp"
#include "weakshot/grad_check.hpp"
#include "weakshot/losses.hpp"
#include "weakshot/simnet.hpp"
#include "weakshot/studies.hpp"

using namespace weakshot;

namespace {

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

double now_s() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

TrainConfig variant(const TrainConfig& base, std::uint64_t seed, bool ad, bool w, bool r) {
  TrainConfig t = base;
  t.seed = seed;
  t.use_adversarial = ad;
  t.use_weights = w;
  t.use_reg = r;
  return t;
}

// The same reduced shapes the unit tests use: full determinism claims do not
// depend on the problem size, so check them where reruns cost seconds.
ExperimentConfig small_config() {
  ExperimentConfig e;
  e.data.n_base_categories = 3;
  e.data.n_novel_categories = 2;
  e.data.dim = 8;
  e.data.base_train_per_category = 12;
  e.data.novel_train_per_category = 16;
  e.data.test_per_category = 8;
  e.data.n_superclusters = 2;
  e.data.intra_category_std = 0.4;
  e.data.inter_category_std = 1.0;
  e.data.supercluster_std = 2.0;
  e.noise.ratio = 0.25;
  e.noise.flip_fraction = 0.5;
  e.train.sim_cm = 3;
  e.train.sim_batch = 9;
  e.train.sim_epochs = 4;
  e.train.sim_pretrain_epochs = 2;
  e.train.sim_embed_dim = 8;
  e.train.sim_relation_dim = 12;
  e.train.disc_hidden = 8;
  e.train.cls_lr = 0.02;
  e.train.cls_batch = 16;
  e.train.cls_epochs = 6;
  e.train.cls_embed_dim = 16;
  e.train.eval_batches = 5;
  return e;
}

bool same_metrics(const PairMetrics& a, const PairMetrics& b) {
  return a.similar.precision == b.similar.precision && a.similar.recall == b.similar.recall &&
         a.similar.f1 == b.similar.f1 && a.dissimilar.precision == b.dissimilar.precision &&
         a.dissimilar.recall == b.dissimilar.recall && a.dissimilar.f1 == b.dissimilar.f1;
}

bool same_weights(const std::map<int, SampleWeights>& a, const std::map<int, SampleWeights>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [cat, w] : a) {
    const auto it = b.find(cat);
    if (it == b.end() || w.raw != it->second.raw || w.normalized != it->second.normalized)
      return false;
  }
  return true;
}

// --- criterion computations ---------------------------------------------

Check check_gradients() {
  Check c{"gradient checks on every differentiable loss", false, ""};
  Rng rng(101);
  double worst = 0.0;

  for (int trial = 0; trial < 5; ++trial) {
    const double s = rng.uniform(0.05, 0.95);
    const int y = trial % 2;
    const double point[] = {s};
    const double grad[] = {binary_ce(s, y).dscore};
    worst = std::max(
        worst, grad_check([&](std::span<const double> p) { return binary_ce(p[0], y).loss; },
                          point, grad));
  }

  {
    Matrix logits(6, 4);
    for (double& v : logits.data) v = rng.normal();
    std::vector<int> labels(6);
    for (int& l : labels) l = static_cast<int>(rng.uniform_int(4));
    const SoftmaxCeResult r = softmax_ce(logits, labels);
    worst = std::max(worst, grad_check(
                                [&](std::span<const double> p) {
                                  Matrix m(6, 4);
                                  std::copy(p.begin(), p.end(), m.data.begin());
                                  const SoftmaxCeResult rr = softmax_ce(m, labels);
                                  double sum = 0.0;
                                  for (double v : rr.per_sample_loss) sum += v;
                                  return sum / 6.0;
                                },
                                logits.data, r.dlogits.data));

    std::vector<double> w(6);
    for (double& v : w) v = rng.uniform(0.0, 2.0);
    const WeightedCeResult wr = weighted_ce_loss(logits, labels, w);
    worst = std::max(worst, grad_check(
                                [&](std::span<const double> p) {
                                  Matrix m(6, 4);
                                  std::copy(p.begin(), p.end(), m.data.begin());
                                  return weighted_ce_loss(m, labels, w).loss;
                                },
                                logits.data, wr.dlogits.data));
  }

  {
    Matrix h(6, 5);
    for (double& v : h.data) v = rng.normal();
    SimilarityMatrix s;
    s.values = Matrix(6, 6);
    for (double& v : s.values.data) v = rng.uniform();
    const GraphRegResult r = graph_reg_loss(h, s);
    worst = std::max(worst, grad_check(
                                [&](std::span<const double> p) {
                                  Matrix m(6, 5);
                                  std::copy(p.begin(), p.end(), m.data.begin());
                                  return graph_reg_loss(m, s).normalized;
                                },
                                h.data, r.dembeddings.data));
  }

  {
    SimNetModel model = make_simnet(3, 4, 6, rng);
    Discriminator disc = make_discriminator(6, 4, rng);
    // Zero-bias fresh nets park dead-relu rows exactly on the kink, where
    // central differences cannot agree with any subgradient choice.
    const auto jitter_biases = [&rng](MlpParams& p) {
      for (MlpLayer& l : p.layers)
        for (double& b : l.bias) b = rng.uniform(0.05, 0.25);
    };
    jitter_biases(model.backbone);
    jitter_biases(model.relation_fc);
    jitter_biases(model.score_head);
    jitter_biases(disc.net);
    DatasetSpec spec;
    spec.n_base_categories = 2;
    spec.n_novel_categories = 2;
    spec.dim = 3;
    spec.base_train_per_category = 8;
    spec.novel_train_per_category = 8;
    spec.test_per_category = 2;
    spec.n_superclusters = 2;
    spec.intra_category_std = 0.4;
    spec.seed = 101;
    const Dataset ds = generate_dataset(spec);
    Rng batch_rng(102);
    const PairBatch base =
        sample_balanced_batch(make_view(ds, Split::base_train), 2, 4, batch_rng);
    const PairBatch novel =
        sample_balanced_batch(make_view(ds, Split::novel_train), 2, 4, batch_rng);
    const double beta = 0.1;
    const AdvLossResult r = adversarial_losses(model, disc, base, novel, beta);

    worst = std::max(worst, grad_check(
                                [&](std::span<const double> p) {
                                  Discriminator d2 = disc;
                                  unflatten(d2.net, p);
                                  return adversarial_losses(model, d2, base, novel, beta).l_d;
                                },
                                flatten(disc.net), flatten(r.disc_grads)));

    const auto model_part = [&](MlpParams SimNetModel::* part, const MlpGrads& grads) {
      worst = std::max(worst, grad_check(
                                  [&](std::span<const double> p) {
                                    SimNetModel m2 = model;
                                    unflatten(m2.*part, p);
                                    return adversarial_losses(m2, disc, base, novel, beta).l_g;
                                  },
                                  flatten(model.*part), flatten(grads)));
    };
    model_part(&SimNetModel::backbone, r.model_grads.backbone);
    model_part(&SimNetModel::relation_fc, r.model_grads.relation_fc);
    model_part(&SimNetModel::score_head, r.model_grads.score_head);
  }

  c.ok = worst < 1e-3;
  c.detail = "worst relative error " + fmt(worst);
  return c;
}

Check check_weight_oracle() {
  Check c{"per-sample weights match a brute-force re-derivation", false, ""};
  Rng rng(201);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(49);
    SimilarityMatrix s;
    s.values = Matrix(n, n);
    for (double& v : s.values.data) v = rng.uniform();
    const SampleWeights w = compute_sample_weights(s);

    // Independent evaluation: mean symmetrized similarity per row, then
    // divide by the mean so the weights average to one.
    std::vector<double> raw(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        raw[i] += 0.5 * (s.values(i, j) + s.values(j, i));
      raw[i] /= static_cast<double>(n);
      total += raw[i];
    }
    const double norm = total / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(raw[i] - w.raw[i]));
      worst = std::max(worst, std::abs(raw[i] / norm - w.normalized[i]));
    }
  }
  c.ok = worst < 1e-12;
  c.detail = "100 matrices up to N=50, worst deviation " + fmt(worst);
  return c;
}

Check check_random_predictor(const DataView& base_train) {
  Check c{"random predictor reproduces the analytic pair F1s", false, ""};
  Rng score_rng(derive_seed(301, "random-scorer"));
  const PairScorer coin = [&score_rng](const PairBatch& b) {
    Matrix s(b.size(), b.size());
    for (double& v : s.data) v = score_rng.uniform();
    return s;
  };
  Rng rng(302);
  const PairMetrics m = eval_pairs(coin, base_train, 10, 100, 200, rng);
  const double ds = std::abs(m.similar.f1 - 16.7);
  const double dd = std::abs(m.dissimilar.f1 - 64.3);
  c.ok = ds <= 1.0 && dd <= 1.0;
  c.detail = "similar F1 " + fmt(m.similar.f1) + ", dissimilar F1 " + fmt(m.dissimilar.f1);
  return c;
}

Check check_batch_composition(const DataView& base_train) {
  Check c{"balanced batches hit the exact same-pair fraction", false, ""};
  bool all_exact = true;
  for (std::uint64_t seed = 1; seed <= 4 && all_exact; ++seed) {
    Rng rng(seed);
    for (int trial = 0; trial < 50 && all_exact; ++trial) {
      const std::size_t cm = trial % 2 ? 10 : 5;
      const std::size_t m = cm * 10;
      const PairBatch b = sample_balanced_batch(base_train, cm, m, rng);
      const Matrix labels = pair_label_matrix(b.labels);
      std::size_t same_offdiag = 0;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) same_offdiag += i != j && labels(i, j) == 1.0;
      all_exact = same_offdiag == cm * 10 * 9;
    }
  }
  c.ok = all_exact;
  c.detail = all_exact ? "200 batches, zero deviations" : "composition off";
  return c;
}

struct SeedArtifacts {
  Dataset ds;
  SimTrainResult sim_plain;  // base pairs only
  SimTrainResult sim_adv;    // base pairs + novel alignment
  RunResult cls, w, r, wr, adwr;
};

}  // namespace

int main() {
  std::vector<Check> checks(12);
  const ExperimentConfig cfg;  // library defaults are the experiment defaults
  const std::vector<std::uint64_t> seeds = cfg.seeds;

  std::printf("acceptance: %zu seeds, default experiment shape\n", seeds.size());

  // Cheap analytic checks first.
  checks[0] = check_gradients();
  checks[1] = check_weight_oracle();
  {
    const Dataset probe = build_dataset(cfg, seeds.front());
    const DataView base_train = make_view(probe, Split::base_train);
    checks[2] = Check{"normalized weights have unit mean on every run", true, ""};
    checks[3] = check_random_predictor(base_train);
    checks[4] = check_batch_composition(base_train);
  }
  std::printf("analytic checks done at %.0fs\n", now_s());

  // One pass per seed over the toggle grid, sharing the two trained
  // similarity networks exactly the way the ablation driver does.
  std::vector<SeedArtifacts> per_seed;
  double worst_mean_dev = 0.0;
  const auto collect_weights = [&worst_mean_dev](const RunResult& r) {
    for (const auto& [cat, w] : r.weights) {
      double m = 0.0;
      for (double v : w.normalized) m += v;
      m /= static_cast<double>(w.size());
      worst_mean_dev = std::max(worst_mean_dev, std::abs(m - 1.0));
    }
  };

  for (std::uint64_t seed : seeds) {
    SeedArtifacts a;
    a.ds = build_dataset(cfg, seed);
    const DataView base_train = make_view(a.ds, Split::base_train);
    const DataView novel_train = make_view(a.ds, Split::novel_train);

    a.sim_plain = train_simnet(base_train, nullptr, variant(cfg.train, seed, false, true, false));
    a.sim_adv =
        train_simnet(base_train, &novel_train, variant(cfg.train, seed, true, true, true));

    a.cls = run_pipeline(a.ds, variant(cfg.train, seed, false, false, false));
    a.w = run_pipeline(a.ds, variant(cfg.train, seed, false, true, false), &a.sim_plain);
    a.r = run_pipeline(a.ds, variant(cfg.train, seed, false, false, true), &a.sim_plain);
    a.wr = run_pipeline(a.ds, variant(cfg.train, seed, false, true, true), &a.sim_plain);
    a.adwr = run_pipeline(a.ds, variant(cfg.train, seed, true, true, true), &a.sim_adv);
    for (const RunResult* r : {&a.cls, &a.w, &a.r, &a.wr, &a.adwr}) collect_weights(*r);

    std::printf("seed %llu toggle grid done at %.0fs (Cls %.2f, W %.2f, R %.2f, W+R %.2f, "
                "Ad+W+R %.2f)\n",
                static_cast<unsigned long long>(seed), now_s(), a.cls.accuracy, a.w.accuracy,
                a.r.accuracy, a.wr.accuracy, a.adwr.accuracy);
    per_seed.push_back(std::move(a));
  }

  // 6: ground-truth-noisy samples sit below clean ones, category by category.
  {
    std::size_t cells = 0, separated = 0;
    for (const SeedArtifacts& a : per_seed) {
      const std::map<int, std::vector<bool>>& masks = a.adwr.noisy_mask;
      for (const auto& [cat, w] : a.adwr.weights) {
        const std::vector<bool>& noisy = masks.at(cat);
        double cs = 0.0, ns = 0.0;
        std::size_t cn = 0, nn = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
          (noisy[i] ? ns : cs) += w.normalized[i];
          (noisy[i] ? nn : cn) += 1;
        }
        if (cn == 0 || nn == 0) continue;
        ++cells;
        separated += ns / static_cast<double>(nn) < cs / static_cast<double>(cn);
      }
    }
    const double frac = static_cast<double>(separated) / static_cast<double>(cells);
    checks[5] = Check{"noisy samples are down-weighted per category", frac >= 0.95,
                      std::to_string(separated) + "/" + std::to_string(cells) + " categories"};
  }

  // 7: module ablation ordering on mean accuracy.
  {
    std::vector<double> cls, w, r, wr;
    for (const SeedArtifacts& a : per_seed) {
      cls.push_back(a.cls.accuracy);
      w.push_back(a.w.accuracy);
      r.push_back(a.r.accuracy);
      wr.push_back(a.wr.accuracy);
    }
    const double m_cls = mean(cls), m_w = mean(w), m_r = mean(r), m_wr = mean(wr);
    const bool ok = m_cls < m_w && m_cls < m_r && std::max(m_w, m_r) <= m_wr + 0.5;
    checks[6] = Check{"ablation ordering Cls < {W, R} <= W+R", ok,
                      "Cls " + fmt(m_cls) + ", W " + fmt(m_w) + ", R " + fmt(m_r) + ", W+R " +
                          fmt(m_wr)};
  }

  // 8: pair F1 transfers from base-test to novel-test pairs.
  {
    std::vector<double> gaps;
    for (const SeedArtifacts& a : per_seed)
      gaps.push_back(std::abs(a.w.base_pairs.similar.f1 - a.w.novel_pairs.similar.f1));
    const double g = mean(gaps);
    checks[7] = Check{"similarity transfers across the category shift", g < 10.0,
                      "mean |base F1 - novel F1| = " + fmt(g)};
  }
  std::printf("toggle-grid checks done at %.0fs\n", now_s());

  // 9: a base-trained similarity source beats a novel-(noisy)-trained one.
  {
    std::vector<double> base_acc, novel_acc;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const SeedArtifacts& a = per_seed[i];
      const DataView novel_train = make_view(a.ds, Split::novel_train);
      const TrainConfig t = variant(cfg.train, seeds[i], false, true, true);
      const SimTrainResult sim_novel = train_simnet(novel_train, nullptr, t);
      const RunResult from_novel = run_pipeline(a.ds, t, &sim_novel);
      collect_weights(from_novel);
      base_acc.push_back(a.wr.accuracy);
      novel_acc.push_back(from_novel.accuracy);
    }
    const double b = mean(base_acc), n = mean(novel_acc);
    checks[8] = Check{"clean base pairs are the better similarity source", b > n,
                      "base-trained " + fmt(b) + " vs novel-trained " + fmt(n)};
    std::printf("source comparison done at %.0fs\n", now_s());
  }

  // 10: the full pipeline never loses to plain CE across the noise sweep.
  {
    std::string detail;
    bool ok = true;
    for (double ratio : cfg.noise_ratios) {
      std::vector<double> full, plain;
      if (ratio == cfg.noise.ratio) {
        for (const SeedArtifacts& a : per_seed) {
          full.push_back(a.adwr.accuracy);
          plain.push_back(a.cls.accuracy);
        }
      } else {
        ExperimentConfig swept = cfg;
        swept.noise.ratio = ratio;
        for (std::uint64_t seed : seeds) {
          const Dataset ds = build_dataset(swept, seed);
          const DataView base_train = make_view(ds, Split::base_train);
          const DataView novel_train = make_view(ds, Split::novel_train);
          const TrainConfig t = variant(swept.train, seed, true, true, true);
          const SimTrainResult sim = train_simnet(base_train, &novel_train, t);
          const RunResult r_full = run_pipeline(ds, t, &sim);
          const RunResult r_plain =
              run_pipeline(ds, variant(swept.train, seed, false, false, false));
          collect_weights(r_full);
          collect_weights(r_plain);
          full.push_back(r_full.accuracy);
          plain.push_back(r_plain.accuracy);
        }
      }
      const double gap = mean(full) - mean(plain);
      ok = ok && gap >= 0.0;
      detail += (detail.empty() ? "" : ", ") + fmt(ratio) + ": " + fmt(gap);
      std::printf("noise ratio %.2f done at %.0fs\n", ratio, now_s());
    }
    checks[9] = Check{"full pipeline >= plain CE at every noise ratio", ok, "gaps " + detail};
  }

  // 11: determinism and stream decoupling, on the reduced shape.
  {
    const ExperimentConfig sc = small_config();
    const Dataset ds = build_dataset(sc, 1);
    const DataView base_train = make_view(ds, Split::base_train);
    const DataView novel_train = make_view(ds, Split::novel_train);

    const RunResult a = run_pipeline(ds, sc.train);
    const RunResult b = run_pipeline(ds, sc.train);
    const bool rerun_identical = a.accuracy == b.accuracy &&
                                 same_metrics(a.base_pairs, b.base_pairs) &&
                                 same_metrics(a.novel_pairs, b.novel_pairs) &&
                                 same_weights(a.weights, b.weights);

    TrainConfig t0 = sc.train;
    t0.beta = 0.0;
    t0.sim_pretrain_backbone = false;
    const SimTrainResult adv0 = train_simnet(base_train, &novel_train, t0);
    const SimTrainResult plain = train_simnet(base_train, nullptr, t0);
    bool beta0_identical = flatten(adv0.model.backbone) == flatten(plain.model.backbone) &&
                           flatten(adv0.model.relation_fc) == flatten(plain.model.relation_fc) &&
                           flatten(adv0.model.score_head) == flatten(plain.model.score_head);
    for (std::size_t e = 0; e < adv0.epochs.size() && beta0_identical; ++e)
      beta0_identical = adv0.epochs[e].relation_ce == plain.epochs[e].relation_ce;

    const SimTrainResult shared = train_simnet(base_train, nullptr, sc.train);
    const RunResult on = run_pipeline(ds, variant(sc.train, 1, true, true, false), &shared);
    const RunResult off = run_pipeline(ds, variant(sc.train, 1, false, true, false), &shared);
    const bool decoupled = on.accuracy == off.accuracy && same_weights(on.weights, off.weights) &&
                           same_metrics(on.base_pairs, off.base_pairs);

    checks[10] = Check{"bit-identical reruns, inert beta=0, decoupled streams",
                       rerun_identical && beta0_identical && decoupled,
                       std::string("rerun ") + (rerun_identical ? "ok" : "DIFFERS") +
                           ", beta0 " + (beta0_identical ? "ok" : "DIFFERS") + ", toggle " +
                           (decoupled ? "ok" : "DIFFERS")};
  }

  // 12: generalized evaluation.
  {
    std::vector<double> full, plain;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const SeedArtifacts& a = per_seed[i];
      TrainConfig t = variant(cfg.train, seeds[i], true, true, true);
      t.mode = Mode::generalized;
      TrainConfig t_plain = variant(cfg.train, seeds[i], false, false, false);
      t_plain.mode = Mode::generalized;
      const RunResult r_full = run_pipeline(a.ds, t, &a.sim_adv);
      const RunResult r_plain = run_pipeline(a.ds, t_plain);
      collect_weights(r_full);
      full.push_back(r_full.accuracy);
      plain.push_back(r_plain.accuracy);
    }
    const double f = mean(full), p = mean(plain);

    // With no base records the two modes must collapse to the same run.
    ExperimentConfig sc = small_config();
    Dataset no_base = build_dataset(sc, 3);
    std::erase_if(no_base.records, [](const Record& r) {
      return r.split == Split::base_train || r.split == Split::base_test;
    });
    TrainConfig tw = variant(sc.train, 3, false, false, false);
    TrainConfig tg = tw;
    tg.mode = Mode::generalized;
    const RunResult weak = run_pipeline(no_base, tw);
    const RunResult gen = run_pipeline(no_base, tg);
    const bool collapse =
        weak.accuracy == gen.accuracy &&
        flatten(weak.classifier.model.backbone) == flatten(gen.classifier.model.backbone) &&
        flatten(weak.classifier.model.head) == flatten(gen.classifier.model.head);

    checks[11] = Check{"generalized mode beats plain CE and collapses without base data",
                       f > p && collapse,
                       "full " + fmt(f) + " vs plain " + fmt(p) + ", empty-base collapse " +
                           (collapse ? "ok" : "DIFFERS")};
    std::printf("generalized checks done at %.0fs\n", now_s());
  }

  checks[2].ok = worst_mean_dev < 1e-9;
  checks[2].detail = "worst |mean - 1| = " + fmt(worst_mean_dev) + " over all runs";

  int failures = 0;
  std::printf("\n");
  for (std::size_t i = 0; i < checks.size(); ++i) {
    std::printf("[%2zu] %s %s (%s)\n", i + 1, checks[i].ok ? "PASS" : "FAIL",
                checks[i].name.c_str(), checks[i].detail.c_str());
    failures += !checks[i].ok;
  }
  std::printf("\n%d of 12 criteria failed, %.0fs total\n", failures, now_s());
  return failures;
}
