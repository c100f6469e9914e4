#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weakshot/classifier.hpp"
#include "weakshot/config.hpp"
#include "weakshot/dataset.hpp"
#include "weakshot/denoise.hpp"
#include "weakshot/simnet.hpp"
#include "weakshot/train_config.hpp"

namespace weakshot {

// Everything one experiment needs: the data recipe, the noise recipe, the training
// recipe, the seed list and the study grids. Round-trips through the flat config
// format; unknown keys in a file are hard errors.
struct ExperimentConfig {
  DatasetSpec data;
  NoiseSpec noise;
  TrainConfig train;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = "out";
  std::string data_file;  // when set, run loads this dataset instead of generating

  std::vector<double> noise_ratios = {0.1, 0.2, 0.3, 0.4};
  std::vector<std::uint64_t> scale_categories = {5, 10, 15};
  std::vector<std::uint64_t> scale_images = {5, 15, 30};

  static ExperimentConfig from_config(const Config& cfg);
  Config to_config() const;
  std::uint64_t hash() const;
  void validate() const;
};

// Dataset for one run. Generation and noise injection draw from substreams of the
// run seed so neither perturbs the other (or anything downstream).
Dataset build_dataset(const ExperimentConfig& cfg, std::uint64_t run_seed);

// How the classifier's similarity matrices are produced. Oracle setups read the
// dataset's ground truth directly (test-side diagnostics only).
struct SimilaritySetup {
  SimilaritySource source = SimilaritySource::simnet;
  const SimNetModel* model = nullptr;  // required for source == simnet
};

struct RunResult {
  double accuracy = 0.0;  // top-1 percent on the mode's test set
  PairMetrics base_pairs;   // nan-filled when the run trained no SimNet
  PairMetrics novel_pairs;
  double mean_w_clean = 1.0;
  double mean_w_noisy = 1.0;  // nan when the data has no noisy samples

  std::optional<SimTrainResult> simnet;
  ClsTrainResult classifier;
  std::map<int, SampleWeights> weights;         // per novel category
  std::map<int, std::vector<bool>> noisy_mask;  // ground truth, same ordering
};

// One full pipeline: SimNet (unless supplied or not needed) -> per-category weights
// -> classifier -> evaluation. `pretrained` lets studies share a SimNet across runs
// with the same seed and adversarial setting.
RunResult run_pipeline(const Dataset& dataset, const TrainConfig& cfg,
                       const SimTrainResult* pretrained = nullptr);

// run_pipeline with the similarity machinery swapped out (baseline/oracle rows of
// the transfer study).
RunResult run_pipeline_with(const Dataset& dataset, const TrainConfig& cfg,
                            const SimilaritySetup& setup);

int cmd_gen_data(const ExperimentConfig& cfg);
int cmd_run(const ExperimentConfig& cfg);
int cmd_ablation(const ExperimentConfig& cfg);
int cmd_transfer_study(const ExperimentConfig& cfg);
int cmd_scale_study(const ExperimentConfig& cfg);
int cmd_noise_study(const ExperimentConfig& cfg);
int cmd_report(const std::string& run_dir);

}  // namespace weakshot
