#include <cmath>
#include <vector>

#include "doctest.h"
#include "weakshot/studies.hpp"

using namespace weakshot;

namespace {

// Small enough to train in a couple of seconds, big enough to be non-trivial.
ExperimentConfig tiny_config() {
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
  e.seeds = {1};
  e.scale_categories = {2, 3};
  e.scale_images = {6, 12};
  return e;
}

}  // namespace

TEST_CASE("experiment config round-trips through the flat format") {
  ExperimentConfig e = tiny_config();
  e.train.use_adversarial = false;
  e.noise_ratios = {0.1, 0.3};
  e.out_dir = "somewhere";

  const Config c = e.to_config();
  const ExperimentConfig back = ExperimentConfig::from_config(c);
  CHECK(back.to_config().serialize() == c.serialize());
  CHECK(back.hash() == e.hash());
  CHECK(back.data.dim == 8);
  CHECK(back.train.use_adversarial == false);
  CHECK(back.noise_ratios == std::vector<double>{0.1, 0.3});

  const Config reparsed = Config::parse_string(c.serialize());
  CHECK(ExperimentConfig::from_config(reparsed).hash() == e.hash());
}

TEST_CASE("unknown keys in a config are hard errors") {
  Config c = tiny_config().to_config();
  c.set("train.sim_epochz", "3");
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_config(c), doctest::Contains("sim_epochz"),
                       config_error);
}

TEST_CASE("config hash tracks every field") {
  ExperimentConfig a = tiny_config();
  ExperimentConfig b = tiny_config();
  CHECK(a.hash() == b.hash());
  b.noise.ratio = 0.3;
  CHECK(a.hash() != b.hash());
  b = tiny_config();
  b.train.alpha = 0.2;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("validation catches inconsistent study grids") {
  ExperimentConfig e = tiny_config();
  e.scale_categories = {5};  // only 3 base categories exist
  CHECK_THROWS_AS(e.validate(), config_error);
  e = tiny_config();
  e.seeds.clear();
  CHECK_THROWS_AS(e.validate(), config_error);
  e = tiny_config();
  e.noise_ratios = {1.5};
  CHECK_THROWS_AS(e.validate(), config_error);
}

TEST_CASE("build_dataset derives generation and noise from the run seed") {
  const ExperimentConfig cfg = tiny_config();
  const Dataset a = build_dataset(cfg, 1);
  CHECK(a == build_dataset(cfg, 1));
  CHECK_FALSE(a == build_dataset(cfg, 2));

  // The noise stream is separate: changing the ratio leaves generation alone.
  ExperimentConfig noisier = cfg;
  noisier.noise.ratio = 0.5;
  const Dataset b = build_dataset(noisier, 1);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (a.records[i].split == Split::novel_train) continue;
    CHECK(a.records[i] == b.records[i]);
  }
}

TEST_CASE("run_pipeline is deterministic end to end") {
  const ExperimentConfig cfg = tiny_config();
  const Dataset ds = build_dataset(cfg, 1);

  const RunResult a = run_pipeline(ds, cfg.train);
  const RunResult b = run_pipeline(ds, cfg.train);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.base_pairs.similar.f1 == b.base_pairs.similar.f1);
  CHECK(a.novel_pairs.dissimilar.f1 == b.novel_pairs.dissimilar.f1);
  CHECK(a.mean_w_clean == b.mean_w_clean);
  CHECK(a.mean_w_noisy == b.mean_w_noisy);
  REQUIRE(a.weights.size() == 2);
  for (const auto& [cat, w] : a.weights) {
    CHECK(w.normalized == b.weights.at(cat).normalized);
    CHECK(w.size() == 16);
  }

  CHECK(a.accuracy >= 0.0);
  CHECK(a.accuracy <= 100.0);
  REQUIRE(a.simnet.has_value());
  CHECK(a.simnet->adversarial);
  CHECK(std::isfinite(a.base_pairs.similar.f1));
  CHECK(std::isfinite(a.novel_pairs.similar.f1));
}

TEST_CASE("plain CE runs train no similarity network") {
  const ExperimentConfig cfg = tiny_config();
  const Dataset ds = build_dataset(cfg, 1);
  TrainConfig t = cfg.train;
  t.use_weights = false;
  t.use_reg = false;

  const RunResult r = run_pipeline(ds, t);
  CHECK_FALSE(r.simnet.has_value());
  CHECK(std::isnan(r.base_pairs.similar.f1));
  CHECK(std::isnan(r.novel_pairs.dissimilar.f1));
  for (const auto& [cat, w] : r.weights)
    for (double v : w.normalized) CHECK(v == 1.0);
}

TEST_CASE("an oracle similarity source down-weights the noise it can see") {
  const ExperimentConfig cfg = tiny_config();
  const Dataset ds = build_dataset(cfg, 1);

  SimilaritySetup setup;
  setup.source = SimilaritySource::oracle;
  const RunResult r = run_pipeline_with(ds, cfg.train, setup);
  CHECK(r.mean_w_noisy < r.mean_w_clean);
  CHECK_FALSE(r.simnet.has_value());

  // Ground-truth masks line up with the weight vectors.
  for (const auto& [cat, mask] : r.noisy_mask) {
    REQUIRE(r.weights.count(cat) == 1);
    CHECK(mask.size() == r.weights.at(cat).size());
  }
}

TEST_CASE("a supplied similarity network is reused, not retrained") {
  const ExperimentConfig cfg = tiny_config();
  const Dataset ds = build_dataset(cfg, 1);
  const DataView base_train = make_view(ds, Split::base_train);
  const DataView novel_train = make_view(ds, Split::novel_train);

  const SimTrainResult sim = train_simnet(base_train, &novel_train, cfg.train);
  const RunResult a = run_pipeline(ds, cfg.train, &sim);
  const RunResult b = run_pipeline(ds, cfg.train);
  // Same config and seed: training inside the pipeline gives the same network.
  CHECK(a.accuracy == b.accuracy);
  CHECK(flatten(a.simnet->model.backbone) == flatten(b.simnet->model.backbone));
}
