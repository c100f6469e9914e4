#include "weakshot/studies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <utility>

#include "weakshot/checkpoint.hpp"
#include "weakshot/csv.hpp"
#include "weakshot/errors.hpp"
#include "weakshot/svg.hpp"
#include "weakshot/text.hpp"

namespace weakshot {

namespace fs = std::filesystem;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory " + dir + ": " + ec.message());
}

std::string join_u64_list(const std::vector<std::uint64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_double_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt_double(v[i]);
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
  ExperimentConfig e;
  e.data.n_base_categories = cfg.get_u64("data.base_categories", e.data.n_base_categories);
  e.data.n_novel_categories = cfg.get_u64("data.novel_categories", e.data.n_novel_categories);
  e.data.dim = cfg.get_u64("data.dim", e.data.dim);
  e.data.base_train_per_category =
      cfg.get_u64("data.base_train_per_category", e.data.base_train_per_category);
  e.data.novel_train_per_category =
      cfg.get_u64("data.novel_train_per_category", e.data.novel_train_per_category);
  e.data.test_per_category = cfg.get_u64("data.test_per_category", e.data.test_per_category);
  e.data.n_superclusters = cfg.get_u64("data.superclusters", e.data.n_superclusters);
  e.data.intra_category_std = cfg.get_double("data.intra_std", e.data.intra_category_std);
  e.data.inter_category_std = cfg.get_double("data.inter_std", e.data.inter_category_std);
  e.data.supercluster_std = cfg.get_double("data.supercluster_std", e.data.supercluster_std);

  e.noise.ratio = cfg.get_double("noise.ratio", e.noise.ratio);
  e.noise.flip_fraction = cfg.get_double("noise.flip_fraction", e.noise.flip_fraction);

  e.train.seed = cfg.get_u64("seed", e.train.seed);
  e.train.mode = mode_from_string(cfg.get_string("train.mode", to_string(e.train.mode)));
  e.train.use_weights = cfg.get_bool("train.use_weights", e.train.use_weights);
  e.train.use_reg = cfg.get_bool("train.use_reg", e.train.use_reg);
  e.train.use_adversarial = cfg.get_bool("train.use_adversarial", e.train.use_adversarial);
  e.train.alpha = cfg.get_double("train.alpha", e.train.alpha);
  e.train.beta = cfg.get_double("train.beta", e.train.beta);
  e.train.sim_cm = cfg.get_u64("train.sim_cm", e.train.sim_cm);
  e.train.sim_batch = cfg.get_u64("train.sim_batch", e.train.sim_batch);
  e.train.sim_lr = cfg.get_double("train.sim_lr", e.train.sim_lr);
  e.train.sim_epochs = cfg.get_u64("train.sim_epochs", e.train.sim_epochs);
  e.train.sim_pretrain_backbone =
      cfg.get_bool("train.sim_pretrain_backbone", e.train.sim_pretrain_backbone);
  e.train.sim_pretrain_epochs =
      cfg.get_u64("train.sim_pretrain_epochs", e.train.sim_pretrain_epochs);
  e.train.sim_embed_dim = cfg.get_u64("train.sim_embed_dim", e.train.sim_embed_dim);
  e.train.sim_relation_dim = cfg.get_u64("train.sim_relation_dim", e.train.sim_relation_dim);
  e.train.disc_hidden = cfg.get_u64("train.disc_hidden", e.train.disc_hidden);
  e.train.cls_lr = cfg.get_double("train.cls_lr", e.train.cls_lr);
  e.train.cls_batch = cfg.get_u64("train.cls_batch", e.train.cls_batch);
  e.train.cls_epochs = cfg.get_u64("train.cls_epochs", e.train.cls_epochs);
  e.train.cls_embed_dim = cfg.get_u64("train.cls_embed_dim", e.train.cls_embed_dim);
  e.train.momentum = cfg.get_double("train.momentum", e.train.momentum);
  e.train.weight_decay = cfg.get_double("train.weight_decay", e.train.weight_decay);
  e.train.eval_batches = cfg.get_u64("train.eval_batches", e.train.eval_batches);
  e.train.similarity_tile = cfg.get_u64("train.similarity_tile", e.train.similarity_tile);

  e.seeds = cfg.get_u64_list("seeds", e.seeds);
  e.out_dir = cfg.get_string("out_dir", e.out_dir);
  e.data_file = cfg.get_string("data_file", e.data_file);
  e.noise_ratios = cfg.get_double_list("study.noise_ratios", e.noise_ratios);
  e.scale_categories = cfg.get_u64_list("study.scale_categories", e.scale_categories);
  e.scale_images = cfg.get_u64_list("study.scale_images", e.scale_images);

  cfg.check_unknown_keys();
  e.validate();
  return e;
}

Config ExperimentConfig::to_config() const {
  Config c;
  c.set("data.base_categories", std::to_string(data.n_base_categories));
  c.set("data.novel_categories", std::to_string(data.n_novel_categories));
  c.set("data.dim", std::to_string(data.dim));
  c.set("data.base_train_per_category", std::to_string(data.base_train_per_category));
  c.set("data.novel_train_per_category", std::to_string(data.novel_train_per_category));
  c.set("data.test_per_category", std::to_string(data.test_per_category));
  c.set("data.superclusters", std::to_string(data.n_superclusters));
  c.set("data.intra_std", fmt_double(data.intra_category_std));
  c.set("data.inter_std", fmt_double(data.inter_category_std));
  c.set("data.supercluster_std", fmt_double(data.supercluster_std));

  c.set("noise.ratio", fmt_double(noise.ratio));
  c.set("noise.flip_fraction", fmt_double(noise.flip_fraction));

  c.set("seed", std::to_string(train.seed));
  c.set("train.mode", to_string(train.mode));
  c.set("train.use_weights", train.use_weights ? "true" : "false");
  c.set("train.use_reg", train.use_reg ? "true" : "false");
  c.set("train.use_adversarial", train.use_adversarial ? "true" : "false");
  c.set("train.alpha", fmt_double(train.alpha));
  c.set("train.beta", fmt_double(train.beta));
  c.set("train.sim_cm", std::to_string(train.sim_cm));
  c.set("train.sim_batch", std::to_string(train.sim_batch));
  c.set("train.sim_lr", fmt_double(train.sim_lr));
  c.set("train.sim_epochs", std::to_string(train.sim_epochs));
  c.set("train.sim_pretrain_backbone", train.sim_pretrain_backbone ? "true" : "false");
  c.set("train.sim_pretrain_epochs", std::to_string(train.sim_pretrain_epochs));
  c.set("train.sim_embed_dim", std::to_string(train.sim_embed_dim));
  c.set("train.sim_relation_dim", std::to_string(train.sim_relation_dim));
  c.set("train.disc_hidden", std::to_string(train.disc_hidden));
  c.set("train.cls_lr", fmt_double(train.cls_lr));
  c.set("train.cls_batch", std::to_string(train.cls_batch));
  c.set("train.cls_epochs", std::to_string(train.cls_epochs));
  c.set("train.cls_embed_dim", std::to_string(train.cls_embed_dim));
  c.set("train.momentum", fmt_double(train.momentum));
  c.set("train.weight_decay", fmt_double(train.weight_decay));
  c.set("train.eval_batches", std::to_string(train.eval_batches));
  c.set("train.similarity_tile", std::to_string(train.similarity_tile));

  c.set("seeds", join_u64_list(seeds));
  c.set("out_dir", out_dir);
  if (!data_file.empty()) c.set("data_file", data_file);
  c.set("study.noise_ratios", join_double_list(noise_ratios));
  c.set("study.scale_categories", join_u64_list(scale_categories));
  c.set("study.scale_images", join_u64_list(scale_images));
  return c;
}

std::uint64_t ExperimentConfig::hash() const { return to_config().hash(); }

void ExperimentConfig::validate() const {
  data.validate();
  noise.validate();
  train.validate();
  if (seeds.empty()) throw config_error("config: seeds list is empty");
  if (out_dir.empty()) throw config_error("config: out_dir is empty");
  if (noise_ratios.empty()) throw config_error("config: study.noise_ratios is empty");
  for (double r : noise_ratios)
    if (r < 0.0 || r >= 1.0) throw config_error("config: noise ratio must be in [0, 1)");
  if (scale_categories.empty() || scale_images.empty())
    throw config_error("config: scale study grid is empty");
  for (std::uint64_t c : scale_categories)
    if (c < 1 || c > data.n_base_categories)
      throw config_error("config: scale category count " + std::to_string(c) +
                         " exceeds data.base_categories");
  for (std::uint64_t n : scale_images)
    if (n < 1 || n > data.base_train_per_category)
      throw config_error("config: scale image count " + std::to_string(n) +
                         " exceeds data.base_train_per_category");
}

Dataset build_dataset(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  DatasetSpec data = cfg.data;
  data.seed = derive_seed(run_seed, "data");
  NoiseSpec noise = cfg.noise;
  noise.seed = derive_seed(run_seed, "noise");
  return inject_web_noise(generate_dataset(data), noise);
}

namespace {

PairMetrics nan_pair_metrics() {
  const ClassMetrics c{kNaN, kNaN, kNaN};
  return PairMetrics{c, c};
}

// One batch shape that both test splits can satisfy: pair metrics of the two
// splits are only comparable when measured on identically shaped batches.
BatchShape common_eval_shape(const TrainConfig& cfg, const DataView& a, const DataView& b) {
  const BatchShape sa = clamp_batch_shape(a, cfg.sim_cm, cfg.sim_batch);
  const BatchShape sb = clamp_batch_shape(b, cfg.sim_cm, cfg.sim_batch);
  BatchShape s;
  s.c_m = std::min(sa.c_m, sb.c_m);
  s.m = s.c_m * std::min(sa.m / sa.c_m, sb.m / sb.c_m);
  return s;
}

struct SplitPairMetrics {
  PairMetrics base, novel;
  std::size_t eval_cm = 0;
};

SplitPairMetrics eval_on_both_splits(const SimNetModel& model, const DataView& base_test,
                                     const DataView& novel_test, const TrainConfig& cfg) {
  const BatchShape s = common_eval_shape(cfg, base_test, novel_test);
  Rng rng_base(derive_seed(cfg.seed, "eval-base-pairs"));
  Rng rng_novel(derive_seed(cfg.seed, "eval-novel-pairs"));
  SplitPairMetrics out;
  out.base = eval_pairs(model, base_test, s.c_m, s.m, cfg.eval_batches, rng_base);
  out.novel = eval_pairs(model, novel_test, s.c_m, s.m, cfg.eval_batches, rng_novel);
  out.eval_cm = s.c_m;
  return out;
}

Matrix rows_features(const DataView& view, const std::vector<std::size_t>& rows) {
  Matrix f(rows.size(), view.features.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* src = view.features.row(rows[i]);
    std::copy(src, src + f.cols, f.row(i));
  }
  return f;
}

// Ground-truth labels for oracle similarity. Outliers belong to no category, so
// each gets an id that matches nothing (not even other outliers).
std::vector<int> oracle_labels(const Dataset& ds, const DataView& view,
                               const std::vector<std::size_t>& rows) {
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Record& rec = ds.records[view.record_indices[rows[i]]];
    labels[i] = rec.noise_kind == NoiseKind::outlier ? -static_cast<int>(rows[i]) - 1
                                                     : rec.true_label;
  }
  return labels;
}

// Truth for every training row (novel rows first, then base), the ordering
// train_classifier hands to similarity providers.
std::vector<int> training_truth_table(const Dataset& ds, const DataView& novel,
                                      const DataView* base) {
  std::vector<std::size_t> all(novel.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<int> truth = oracle_labels(ds, novel, all);
  if (base)
    for (std::size_t i = 0; i < base->size(); ++i)
      truth.push_back(ds.records[base->record_indices[i]].true_label);
  return truth;
}

std::map<int, SampleWeights> compute_weights_map(const Dataset& ds, const DataView& novel,
                                                 const SimilaritySetup& setup,
                                                 std::size_t tile) {
  std::map<int, SampleWeights> out;
  for (const auto& [cat, rows] : novel.by_category) {
    const Matrix feats = rows_features(novel, rows);
    SimilarityMatrix s;
    switch (setup.source) {
      case SimilaritySource::simnet:
        s = category_similarity_matrix(*setup.model, feats, tile);
        break;
      case SimilaritySource::euclidean:
        s = baseline_similarity(feats, BaselineKind::euclidean);
        break;
      case SimilaritySource::cosine:
        s = baseline_similarity(feats, BaselineKind::cosine);
        break;
      case SimilaritySource::oracle:
        s = oracle_similarity(oracle_labels(ds, novel, rows));
        break;
    }
    out.emplace(cat, compute_sample_weights(s));
  }
  return out;
}

std::map<int, SampleWeights> uniform_weights_map(const DataView& novel) {
  std::map<int, SampleWeights> out;
  for (const auto& [cat, rows] : novel.by_category) {
    SampleWeights w;
    w.raw.assign(rows.size(), 1.0);
    w.normalized.assign(rows.size(), 1.0);
    out.emplace(cat, std::move(w));
  }
  return out;
}

std::vector<double> per_row_weights(const DataView& novel,
                                    const std::map<int, SampleWeights>& weights) {
  std::vector<double> w(novel.size(), 1.0);
  for (const auto& [cat, rows] : novel.by_category) {
    const auto it = weights.find(cat);
    if (it == weights.end() || it->second.size() != rows.size())
      throw config_error("weights do not cover category " + std::to_string(cat));
    for (std::size_t i = 0; i < rows.size(); ++i) w[rows[i]] = it->second.normalized[i];
  }
  return w;
}

std::map<int, std::vector<bool>> ground_truth_masks(const Dataset& ds, const DataView& novel) {
  std::map<int, std::vector<bool>> masks;
  for (const auto& [cat, rows] : novel.by_category) {
    std::vector<bool>& m = masks[cat];
    m.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      m[i] = ds.records[novel.record_indices[rows[i]]].is_noisy();
  }
  return masks;
}

void split_weight_means(const std::map<int, SampleWeights>& weights,
                        const std::map<int, std::vector<bool>>& masks, double& clean,
                        double& noisy) {
  double cs = 0.0, ns = 0.0;
  std::size_t cn = 0, nn = 0;
  for (const auto& [cat, w] : weights) {
    const std::vector<bool>& m = masks.at(cat);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (m[i]) {
        ns += w.normalized[i];
        ++nn;
      } else {
        cs += w.normalized[i];
        ++cn;
      }
    }
  }
  clean = cn ? cs / static_cast<double>(cn) : kNaN;
  noisy = nn ? ns / static_cast<double>(nn) : kNaN;
}

RunResult run_impl(const Dataset& ds, const TrainConfig& cfg, const SimTrainResult* pretrained,
                   const SimilaritySetup* custom) {
  cfg.validate();
  const DataView novel_train = make_view(ds, Split::novel_train);
  const DataView base_train = make_view(ds, Split::base_train);
  const DataView novel_test = make_view(ds, Split::novel_test);
  const DataView base_test = make_view(ds, Split::base_test);

  RunResult r;
  r.base_pairs = nan_pair_metrics();
  r.novel_pairs = nan_pair_metrics();

  SimilaritySetup setup;
  if (custom) {
    setup = *custom;
    if (setup.source == SimilaritySource::simnet && setup.model == nullptr)
      throw config_error("run: simnet similarity source needs a model");
  } else if (cfg.use_weights || cfg.use_reg) {
    if (pretrained)
      r.simnet = *pretrained;
    else
      r.simnet = train_simnet(base_train, cfg.use_adversarial ? &novel_train : nullptr, cfg);
    setup.source = SimilaritySource::simnet;
    setup.model = &r.simnet->model;
  }

  r.weights = cfg.use_weights ? compute_weights_map(ds, novel_train, setup, cfg.similarity_tile)
                              : uniform_weights_map(novel_train);
  const std::vector<double> w = per_row_weights(novel_train, r.weights);

  SimilarityProvider provider;
  if (cfg.use_reg) {
    switch (setup.source) {
      case SimilaritySource::simnet: {
        const SimNetModel* model = setup.model;
        const std::size_t tile = cfg.similarity_tile;
        provider = [model, tile](const Matrix& x, std::span<const std::size_t>) {
          return batch_similarity(*model, x, tile);
        };
        break;
      }
      case SimilaritySource::euclidean:
        provider = [](const Matrix& x, std::span<const std::size_t>) {
          return baseline_similarity(x, BaselineKind::euclidean);
        };
        break;
      case SimilaritySource::cosine:
        provider = [](const Matrix& x, std::span<const std::size_t>) {
          return baseline_similarity(x, BaselineKind::cosine);
        };
        break;
      case SimilaritySource::oracle: {
        auto truth = std::make_shared<const std::vector<int>>(training_truth_table(
            ds, novel_train, cfg.mode == Mode::generalized ? &base_train : nullptr));
        provider = [truth](const Matrix&, std::span<const std::size_t> rows) {
          std::vector<int> labels(rows.size());
          for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = (*truth)[rows[i]];
          return oracle_similarity(labels);
        };
        break;
      }
    }
  }

  const DataView* base_ptr = cfg.mode == Mode::generalized ? &base_train : nullptr;
  const DataView test = cfg.mode == Mode::generalized
                            ? make_view(ds, {Split::base_test, Split::novel_test})
                            : novel_test;
  r.classifier =
      train_classifier(novel_train, w, cfg.use_reg ? &provider : nullptr, cfg, base_ptr, &test);
  r.accuracy = evaluate_accuracy(r.classifier.model, test);

  if (r.simnet) {
    const SplitPairMetrics pm = eval_on_both_splits(r.simnet->model, base_test, novel_test, cfg);
    r.base_pairs = pm.base;
    r.novel_pairs = pm.novel;
  }

  r.noisy_mask = ground_truth_masks(ds, novel_train);
  split_weight_means(r.weights, r.noisy_mask, r.mean_w_clean, r.mean_w_noisy);
  return r;
}

std::vector<std::string> metrics_header() {
  return {"variant",
          "adversarial",
          "weights",
          "reg",
          "seed",
          "accuracy",
          "base_sim_precision",
          "base_sim_recall",
          "base_sim_f1",
          "base_dis_precision",
          "base_dis_recall",
          "base_dis_f1",
          "novel_sim_precision",
          "novel_sim_recall",
          "novel_sim_f1",
          "novel_dis_precision",
          "novel_dis_recall",
          "novel_dis_f1",
          "mean_w_clean",
          "mean_w_noisy",
          "config_hash"};
}

void append_pair_cells(std::vector<std::string>& cells, const PairMetrics& p) {
  for (const ClassMetrics* c : {&p.similar, &p.dissimilar}) {
    cells.push_back(fmt_double(c->precision));
    cells.push_back(fmt_double(c->recall));
    cells.push_back(fmt_double(c->f1));
  }
}

std::vector<std::string> metrics_row(const std::string& variant, const TrainConfig& t,
                                     const RunResult& r, std::uint64_t config_hash) {
  std::vector<std::string> cells{variant,
                                 t.use_adversarial ? "1" : "0",
                                 t.use_weights ? "1" : "0",
                                 t.use_reg ? "1" : "0",
                                 std::to_string(t.seed),
                                 fmt_double(r.accuracy)};
  append_pair_cells(cells, r.base_pairs);
  append_pair_cells(cells, r.novel_pairs);
  cells.push_back(fmt_double(r.mean_w_clean));
  cells.push_back(fmt_double(r.mean_w_noisy));
  cells.push_back(std::to_string(config_hash));
  return cells;
}

// Hash of the study config with this run's training settings substituted in, so
// every emitted row is traceable to the exact configuration that produced it.
std::uint64_t run_hash(const ExperimentConfig& cfg, const TrainConfig& t) {
  ExperimentConfig c = cfg;
  c.train = t;
  return c.hash();
}

void save_simnet_checkpoint(const SimTrainResult& sim, const std::string& path) {
  std::vector<NamedTensor> tensors;
  append_mlp_tensors(tensors, "backbone", sim.model.backbone);
  append_mlp_tensors(tensors, "relation_fc", sim.model.relation_fc);
  append_mlp_tensors(tensors, "score_head", sim.model.score_head);
  if (sim.adversarial) append_mlp_tensors(tensors, "discriminator", sim.disc.net);
  save_checkpoint(tensors, path);
}

void save_classifier_checkpoint(const ClassifierModel& m, const std::string& path) {
  std::vector<NamedTensor> tensors;
  append_mlp_tensors(tensors, "backbone", m.backbone);
  append_mlp_tensors(tensors, "head", m.head);
  Matrix ids(1, m.classes.size());
  for (std::size_t i = 0; i < m.classes.size(); ++i) ids(0, i) = m.classes[i];
  tensors.push_back({"classes", std::move(ids)});
  save_checkpoint(tensors, path);
}

void write_sim_log(const SimTrainResult& sim, const std::string& path) {
  CsvWriter w(path, {"epoch", "relation_ce", "l_d", "l_g"});
  for (std::size_t e = 0; e < sim.epochs.size(); ++e) {
    const SimEpochStats& s = sim.epochs[e];
    w.row({std::to_string(e + 1), fmt_double(s.relation_ce), fmt_double(s.l_d),
           fmt_double(s.l_g)});
  }
  w.close();
}

void write_cls_log(const ClsTrainResult& cls, const std::string& path) {
  CsvWriter w(path, {"epoch", "L_cls_w", "L_reg_raw", "L_reg_norm", "L_full", "train_acc",
                     "test_acc"});
  for (std::size_t e = 0; e < cls.epochs.size(); ++e) {
    const ClsEpochStats& s = cls.epochs[e];
    w.row({std::to_string(e + 1), fmt_double(s.l_cls_w), fmt_double(s.l_reg_raw),
           fmt_double(s.l_reg_norm), fmt_double(s.l_full), fmt_double(s.train_acc),
           fmt_double(s.test_acc)});
  }
  w.close();
}

void write_config_file(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << cfg.to_config().serialize();
  if (!out) throw io_error("write failed for " + path);
}

}  // namespace

RunResult run_pipeline(const Dataset& dataset, const TrainConfig& cfg,
                       const SimTrainResult* pretrained) {
  return run_impl(dataset, cfg, pretrained, nullptr);
}

RunResult run_pipeline_with(const Dataset& dataset, const TrainConfig& cfg,
                            const SimilaritySetup& setup) {
  return run_impl(dataset, cfg, nullptr, &setup);
}

int cmd_gen_data(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string path =
      cfg.data_file.empty() ? join_path(cfg.out_dir, "dataset.txt") : cfg.data_file;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  const Dataset ds = build_dataset(cfg, cfg.train.seed);
  save_dataset(ds, path);
  std::cout << "wrote " << path << " (" << ds.records.size() << " records)" << std::endl;
  return 0;
}

int cmd_run(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  const Dataset ds = cfg.data_file.empty() ? build_dataset(cfg, cfg.train.seed)
                                           : load_dataset(cfg.data_file);
  const RunResult r = run_pipeline(ds, cfg.train);

  write_config_file(cfg, join_path(cfg.out_dir, "config.txt"));
  save_dataset(ds, join_path(cfg.out_dir, "dataset.txt"));
  if (r.simnet) {
    write_sim_log(*r.simnet, join_path(cfg.out_dir, "sim_log.csv"));
    save_simnet_checkpoint(*r.simnet, join_path(cfg.out_dir, "simnet.ckpt"));
  }
  write_cls_log(r.classifier, join_path(cfg.out_dir, "cls_log.csv"));
  save_classifier_checkpoint(r.classifier.model, join_path(cfg.out_dir, "classifier.ckpt"));
  save_weights(r.weights, join_path(cfg.out_dir, "weights.csv"));

  CsvWriter m(join_path(cfg.out_dir, "metrics.csv"), metrics_header());
  m.row(metrics_row("run", cfg.train, r, cfg.hash()));
  m.close();

  std::cout << "run seed=" << cfg.train.seed << " accuracy=" << fmt_double(r.accuracy)
            << std::endl;
  return 0;
}

namespace {

struct AblationCombo {
  const char* label;
  bool ad, w, r;
};

// Table order: baseline, each module alone or paired, then adversarial variants.
constexpr AblationCombo kAblationCombos[] = {
    {"Cls", false, false, false}, {"W", false, true, false},   {"R", false, false, true},
    {"W+R", false, true, true},   {"Ad+W", true, true, false}, {"Ad+R", true, false, true},
    {"Ad+W+R", true, true, true},
};

}  // namespace

int cmd_ablation(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  CsvWriter out(join_path(cfg.out_dir, "ablation.csv"), metrics_header());
  std::map<std::string, std::vector<double>> accs;

  for (std::uint64_t seed : cfg.seeds) {
    const Dataset ds = build_dataset(cfg, seed);
    const DataView base_train = make_view(ds, Split::base_train);
    const DataView novel_train = make_view(ds, Split::novel_train);
    std::optional<SimTrainResult> cached[2];  // indexed by the adversarial toggle

    for (const AblationCombo& combo : kAblationCombos) {
      TrainConfig t = cfg.train;
      t.seed = seed;
      t.use_adversarial = combo.ad;
      t.use_weights = combo.w;
      t.use_reg = combo.r;

      const SimTrainResult* pre = nullptr;
      if (combo.w || combo.r) {
        std::optional<SimTrainResult>& slot = cached[combo.ad ? 1 : 0];
        if (!slot) slot = train_simnet(base_train, combo.ad ? &novel_train : nullptr, t);
        pre = &*slot;
      }
      const RunResult r = run_pipeline(ds, t, pre);
      out.row(metrics_row(combo.label, t, r, run_hash(cfg, t)));
      accs[combo.label].push_back(r.accuracy);
      std::cout << "ablation seed=" << seed << " variant=" << combo.label
                << " accuracy=" << fmt_double(r.accuracy) << std::endl;
    }
  }
  out.close();

  CsvWriter sum(join_path(cfg.out_dir, "ablation_summary.csv"),
                {"variant", "adversarial", "weights", "reg", "n_seeds", "mean_accuracy",
                 "std_accuracy"});
  for (const AblationCombo& combo : kAblationCombos) {
    const std::vector<double>& a = accs[combo.label];
    sum.row({combo.label, combo.ad ? "1" : "0", combo.w ? "1" : "0", combo.r ? "1" : "0",
             std::to_string(a.size()), fmt_double(mean_of(a)), fmt_double(std_of(a))});
  }
  sum.close();
  return 0;
}

int cmd_transfer_study(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  CsvWriter pairs(join_path(cfg.out_dir, "transfer_pairs.csv"),
                  {"seed", "source", "split", "similar_precision", "similar_recall",
                   "similar_f1", "dissimilar_precision", "dissimilar_recall", "dissimilar_f1"});
  CsvWriter acc(join_path(cfg.out_dir, "transfer_accuracy.csv"),
                {"seed", "similarity", "accuracy", "config_hash"});
  std::map<std::string, std::vector<double>> accs;
  std::map<std::string, std::array<std::vector<double>, 2>> sim_f1s;  // [base, novel]

  auto pair_row = [&](std::uint64_t seed, const std::string& source, const std::string& split,
                      const PairMetrics& p) {
    pairs.row({std::to_string(seed), source, split, fmt_double(p.similar.precision),
               fmt_double(p.similar.recall), fmt_double(p.similar.f1),
               fmt_double(p.dissimilar.precision), fmt_double(p.dissimilar.recall),
               fmt_double(p.dissimilar.f1)});
  };

  for (std::uint64_t seed : cfg.seeds) {
    const Dataset ds = build_dataset(cfg, seed);
    const DataView base_train = make_view(ds, Split::base_train);
    const DataView novel_train = make_view(ds, Split::novel_train);
    const DataView base_test = make_view(ds, Split::base_test);
    const DataView novel_test = make_view(ds, Split::novel_test);
    const DataView union_train = make_view(ds, {Split::base_train, Split::novel_train});

    TrainConfig t = cfg.train;
    t.seed = seed;

    struct Source {
      std::string name;
      SimTrainResult sim;
    };
    std::vector<Source> sources;
    sources.push_back(
        {"base", train_simnet(base_train, t.use_adversarial ? &novel_train : nullptr, t)});
    sources.push_back({"novel", train_simnet(novel_train, nullptr, t)});
    sources.push_back({"novel+base", train_simnet(union_train, nullptr, t)});

    for (const Source& s : sources) {
      const SplitPairMetrics pm = eval_on_both_splits(s.sim.model, base_test, novel_test, t);
      pair_row(seed, s.name, "base_test", pm.base);
      pair_row(seed, s.name, "novel_test", pm.novel);
      sim_f1s[s.name][0].push_back(pm.base.similar.f1);
      sim_f1s[s.name][1].push_back(pm.novel.similar.f1);
    }
    const BatchShape shape = common_eval_shape(t, base_test, novel_test);
    pair_row(seed, "rand", "analytic",
             analytic_random_metrics(1.0 / static_cast<double>(shape.c_m)));

    auto accuracy_row = [&](const std::string& name, const SimilaritySetup& setup) {
      const RunResult r = run_pipeline_with(ds, t, setup);
      acc.row({std::to_string(seed), name, fmt_double(r.accuracy),
               std::to_string(run_hash(cfg, t))});
      accs[name].push_back(r.accuracy);
      std::cout << "transfer seed=" << seed << " similarity=" << name
                << " accuracy=" << fmt_double(r.accuracy) << std::endl;
    };
    for (const Source& s : sources)
      accuracy_row("simnet:" + s.name, {SimilaritySource::simnet, &s.sim.model});
    accuracy_row("euclidean", {SimilaritySource::euclidean, nullptr});
    accuracy_row("cosine", {SimilaritySource::cosine, nullptr});
    accuracy_row("oracle", {SimilaritySource::oracle, nullptr});
  }
  pairs.close();
  acc.close();

  CsvWriter sum(join_path(cfg.out_dir, "transfer_summary.csv"),
                {"similarity", "n_seeds", "mean_accuracy", "std_accuracy"});
  for (const auto& [name, a] : accs)
    sum.row({name, std::to_string(a.size()), fmt_double(mean_of(a)), fmt_double(std_of(a))});
  sum.close();

  CsvWriter psum(join_path(cfg.out_dir, "transfer_pairs_summary.csv"),
                 {"source", "split", "mean_similar_f1", "std_similar_f1"});
  for (const auto& [name, f1] : sim_f1s) {
    psum.row({name, "base_test", fmt_double(mean_of(f1[0])), fmt_double(std_of(f1[0]))});
    psum.row({name, "novel_test", fmt_double(mean_of(f1[1])), fmt_double(std_of(f1[1]))});
  }
  psum.close();
  return 0;
}

int cmd_scale_study(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  CsvWriter out(join_path(cfg.out_dir, "scale.csv"),
                {"seed", "base_categories", "images_per_category", "accuracy",
                 "novel_similar_f1", "base_similar_f1", "config_hash"});
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<double>> acc_grid, f1_grid;

  for (std::uint64_t seed : cfg.seeds) {
    const Dataset ds = build_dataset(cfg, seed);
    const DataView novel_train = make_view(ds, Split::novel_train);
    const std::vector<int> base_cats = ds.categories_of(Split::base_train);

    for (std::uint64_t c : cfg.scale_categories) {
      const std::vector<int> cats(base_cats.begin(),
                                  base_cats.begin() + static_cast<std::ptrdiff_t>(c));
      for (std::uint64_t n : cfg.scale_images) {
        const DataView base_view = make_view_categories(ds, Split::base_train, cats, n);
        TrainConfig t = cfg.train;
        t.seed = seed;
        const SimTrainResult sim =
            train_simnet(base_view, t.use_adversarial ? &novel_train : nullptr, t);
        const RunResult r = run_pipeline(ds, t, &sim);
        out.row({std::to_string(seed), std::to_string(c), std::to_string(n),
                 fmt_double(r.accuracy), fmt_double(r.novel_pairs.similar.f1),
                 fmt_double(r.base_pairs.similar.f1), std::to_string(run_hash(cfg, t))});
        acc_grid[{c, n}].push_back(r.accuracy);
        f1_grid[{c, n}].push_back(r.novel_pairs.similar.f1);
        std::cout << "scale seed=" << seed << " C=" << c << " N=" << n
                  << " accuracy=" << fmt_double(r.accuracy) << std::endl;
      }
    }
  }
  out.close();

  CsvWriter sum(join_path(cfg.out_dir, "scale_summary.csv"),
                {"base_categories", "images_per_category", "n_seeds", "mean_accuracy",
                 "std_accuracy", "mean_novel_similar_f1", "std_novel_similar_f1"});
  std::vector<SvgSeries> acc_series, f1_series;
  for (std::uint64_t n : cfg.scale_images) {
    SvgSeries sa{"N=" + std::to_string(n), {}, {}};
    SvgSeries sf = sa;
    for (std::uint64_t c : cfg.scale_categories) {
      const std::vector<double>& a = acc_grid[{c, n}];
      const std::vector<double>& f = f1_grid[{c, n}];
      sum.row({std::to_string(c), std::to_string(n), std::to_string(a.size()),
               fmt_double(mean_of(a)), fmt_double(std_of(a)), fmt_double(mean_of(f)),
               fmt_double(std_of(f))});
      sa.x.push_back(static_cast<double>(c));
      sa.y.push_back(mean_of(a));
      sf.x.push_back(static_cast<double>(c));
      sf.y.push_back(mean_of(f));
    }
    acc_series.push_back(std::move(sa));
    f1_series.push_back(std::move(sf));
  }
  sum.close();
  write_line_plot(join_path(cfg.out_dir, "scale_accuracy.svg"),
                  "Classifier accuracy vs base scale", "base categories", "accuracy (%)",
                  acc_series);
  write_line_plot(join_path(cfg.out_dir, "scale_f1.svg"), "Novel-pair similar F1 vs base scale",
                  "base categories", "F1 (%)", f1_series);
  return 0;
}

int cmd_noise_study(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  CsvWriter out(join_path(cfg.out_dir, "noise.csv"),
                {"seed", "noise_ratio", "method", "accuracy", "config_hash"});
  std::map<double, std::array<std::vector<double>, 2>> accs;  // [cls, simtrans]

  for (double ratio : cfg.noise_ratios) {
    ExperimentConfig c = cfg;
    c.noise.ratio = ratio;
    for (std::uint64_t seed : cfg.seeds) {
      const Dataset ds = build_dataset(c, seed);
      TrainConfig cls = c.train;
      cls.seed = seed;
      cls.use_weights = cls.use_reg = cls.use_adversarial = false;
      TrainConfig full = c.train;
      full.seed = seed;
      full.use_weights = full.use_reg = full.use_adversarial = true;

      const RunResult r_cls = run_pipeline(ds, cls);
      const RunResult r_full = run_pipeline(ds, full);
      out.row({std::to_string(seed), fmt_double(ratio), "cls", fmt_double(r_cls.accuracy),
               std::to_string(run_hash(c, cls))});
      out.row({std::to_string(seed), fmt_double(ratio), "simtrans",
               fmt_double(r_full.accuracy), std::to_string(run_hash(c, full))});
      accs[ratio][0].push_back(r_cls.accuracy);
      accs[ratio][1].push_back(r_full.accuracy);
      std::cout << "noise ratio=" << fmt_double(ratio) << " seed=" << seed
                << " cls=" << fmt_double(r_cls.accuracy)
                << " simtrans=" << fmt_double(r_full.accuracy) << std::endl;
    }
  }
  out.close();

  CsvWriter sum(join_path(cfg.out_dir, "noise_summary.csv"),
                {"noise_ratio", "method", "n_seeds", "mean_accuracy", "std_accuracy"});
  CsvWriter gap(join_path(cfg.out_dir, "noise_gap.csv"),
                {"noise_ratio", "mean_cls", "mean_simtrans", "mean_gap"});
  SvgSeries s_cls{"cls", {}, {}};
  SvgSeries s_full{"simtrans", {}, {}};
  for (double ratio : cfg.noise_ratios) {
    const auto& a = accs[ratio];
    sum.row({fmt_double(ratio), "cls", std::to_string(a[0].size()), fmt_double(mean_of(a[0])),
             fmt_double(std_of(a[0]))});
    sum.row({fmt_double(ratio), "simtrans", std::to_string(a[1].size()),
             fmt_double(mean_of(a[1])), fmt_double(std_of(a[1]))});
    gap.row({fmt_double(ratio), fmt_double(mean_of(a[0])), fmt_double(mean_of(a[1])),
             fmt_double(mean_of(a[1]) - mean_of(a[0]))});
    s_cls.x.push_back(ratio);
    s_cls.y.push_back(mean_of(a[0]));
    s_full.x.push_back(ratio);
    s_full.y.push_back(mean_of(a[1]));
  }
  sum.close();
  gap.close();
  write_line_plot(join_path(cfg.out_dir, "noise_accuracy.svg"), "Accuracy vs label noise",
                  "noise ratio", "accuracy (%)", {s_cls, s_full});
  return 0;
}

int cmd_report(const std::string& run_dir) {
  const std::string metrics_path = join_path(run_dir, "metrics.csv");
  const std::string cls_log_path = join_path(run_dir, "cls_log.csv");
  const std::string weights_path = join_path(run_dir, "weights.csv");
  const std::string dataset_path = join_path(run_dir, "dataset.txt");
  std::vector<std::string> missing;
  for (const std::string* p : {&metrics_path, &cls_log_path, &weights_path, &dataset_path})
    if (!fs::exists(*p)) missing.push_back(*p);
  if (!missing.empty()) {
    std::string msg = "report: missing files:";
    for (const std::string& m : missing) msg += " " + m;
    throw io_error(msg);
  }

  const Dataset ds = load_dataset(dataset_path);
  const DataView novel_train = make_view(ds, Split::novel_train);
  const std::map<int, SampleWeights> weights = load_weights(weights_path);
  const std::map<int, std::vector<bool>> masks = ground_truth_masks(ds, novel_train);

  CsvWriter diag(join_path(run_dir, "weight_diagnostics.csv"),
                 {"category", "n_clean", "n_noisy", "mean_w_clean", "mean_w_noisy",
                  "top3_indices", "top3_noisy", "bottom3_indices", "bottom3_noisy"});
  for (const auto& [cat, w] : weights) {
    const auto mit = masks.find(cat);
    if (mit == masks.end() || mit->second.size() != w.size())
      throw parse_error("report: weights for category " + std::to_string(cat) +
                        " do not match the dataset");
    const std::vector<bool>& noisy = mit->second;
    double cs = 0.0, ns = 0.0;
    std::size_t cn = 0, nn = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (noisy[i]) {
        ns += w.normalized[i];
        ++nn;
      } else {
        cs += w.normalized[i];
        ++cn;
      }
    }
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return w.normalized[a] > w.normalized[b];
    });
    const std::size_t k = std::min<std::size_t>(3, order.size());
    std::string top_idx, top_noisy, bot_idx, bot_noisy;
    for (std::size_t i = 0; i < k; ++i) {
      if (i) {
        top_idx += ';';
        top_noisy += ';';
        bot_idx += ';';
        bot_noisy += ';';
      }
      const std::size_t hi = order[i];
      const std::size_t lo = order[order.size() - 1 - i];
      top_idx += std::to_string(hi);
      top_noisy += noisy[hi] ? "1" : "0";
      bot_idx += std::to_string(lo);
      bot_noisy += noisy[lo] ? "1" : "0";
    }
    diag.row({std::to_string(cat), std::to_string(cn), std::to_string(nn),
              fmt_double(cn ? cs / static_cast<double>(cn) : kNaN),
              fmt_double(nn ? ns / static_cast<double>(nn) : kNaN), top_idx, top_noisy,
              bot_idx, bot_noisy});
  }
  diag.close();

  const auto log = read_csv(cls_log_path);
  SvgSeries train_acc{"train_acc", {}, {}};
  SvgSeries test_acc{"test_acc", {}, {}};
  SvgSeries l_full{"L_full", {}, {}};
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (log[i].size() != 7)
      throw parse_error(cls_log_path + ": row " + std::to_string(i + 1) +
                        ": expected 7 columns");
    double epoch, lf, tr, te;
    if (!parse_double(log[i][0], epoch) || !parse_double(log[i][4], lf) ||
        !parse_double(log[i][5], tr) || !parse_double(log[i][6], te))
      throw parse_error(cls_log_path + ": row " + std::to_string(i + 1) + ": bad number");
    train_acc.x.push_back(epoch);
    train_acc.y.push_back(tr);
    if (std::isfinite(te)) {
      test_acc.x.push_back(epoch);
      test_acc.y.push_back(te);
    }
    l_full.x.push_back(epoch);
    l_full.y.push_back(lf);
  }
  std::vector<SvgSeries> acc_series{train_acc};
  if (!test_acc.x.empty()) acc_series.push_back(test_acc);
  write_line_plot(join_path(run_dir, "learning_curves.svg"), "Classifier accuracy", "epoch",
                  "accuracy (%)", acc_series);
  write_line_plot(join_path(run_dir, "loss_curves.svg"), "Training loss", "epoch", "loss",
                  {l_full});

  std::vector<std::pair<std::string, std::string>> artifacts = {
      {"metrics", metrics_path},
      {"weight_diagnostics", join_path(run_dir, "weight_diagnostics.csv")},
      {"learning_curves", join_path(run_dir, "learning_curves.svg")},
      {"loss_curves", join_path(run_dir, "loss_curves.svg")},
  };

  const std::string sim_log_path = join_path(run_dir, "sim_log.csv");
  if (fs::exists(sim_log_path)) {
    const auto sim = read_csv(sim_log_path);
    SvgSeries ce{"relation_ce", {}, {}};
    SvgSeries ld{"l_d", {}, {}};
    SvgSeries lg{"l_g", {}, {}};
    for (std::size_t i = 1; i < sim.size(); ++i) {
      if (sim[i].size() != 4)
        throw parse_error(sim_log_path + ": row " + std::to_string(i + 1) +
                          ": expected 4 columns");
      double epoch, vce, vld, vlg;
      if (!parse_double(sim[i][0], epoch) || !parse_double(sim[i][1], vce) ||
          !parse_double(sim[i][2], vld) || !parse_double(sim[i][3], vlg))
        throw parse_error(sim_log_path + ": row " + std::to_string(i + 1) + ": bad number");
      ce.x.push_back(epoch);
      ce.y.push_back(vce);
      if (std::isfinite(vld)) {
        ld.x.push_back(epoch);
        ld.y.push_back(vld);
      }
      if (std::isfinite(vlg)) {
        lg.x.push_back(epoch);
        lg.y.push_back(vlg);
      }
    }
    std::vector<SvgSeries> sim_series{ce};
    if (!ld.x.empty()) sim_series.push_back(ld);
    if (!lg.x.empty()) sim_series.push_back(lg);
    write_line_plot(join_path(run_dir, "sim_curves.svg"), "Similarity network training",
                    "epoch", "loss", sim_series);
    artifacts.push_back({"sim_curves", join_path(run_dir, "sim_curves.svg")});
  }

  CsvWriter index(join_path(run_dir, "report_index.csv"), {"artifact", "path"});
  for (const auto& [name, path] : artifacts) index.row({name, path});
  index.close();
  std::cout << "report written to " << run_dir << std::endl;
  return 0;
}

}  // namespace weakshot
