#pragma once

#include <cstdint>
#include <string>

#include "weakshot/errors.hpp"

namespace weakshot {

enum class Mode { weakshot, generalized };

inline std::string to_string(Mode m) { return m == Mode::weakshot ? "weakshot" : "generalized"; }
inline Mode mode_from_string(const std::string& s) {
  if (s == "weakshot") return Mode::weakshot;
  if (s == "generalized") return Mode::generalized;
  throw parse_error("unknown mode '" + s + "'");
}

struct TrainConfig {
  std::uint64_t seed = 1;
  Mode mode = Mode::weakshot;
  bool use_weights = true;
  bool use_reg = true;
  bool use_adversarial = true;

  double alpha = 0.1;  // graph-regularization trade-off
  double beta = 0.1;   // adversarial trade-off

  // Similarity network
  std::size_t sim_cm = 10;     // categories per balanced batch
  std::size_t sim_batch = 100; // images per balanced batch
  double sim_lr = 0.01;
  std::size_t sim_epochs = 50;
  bool sim_pretrain_backbone = true;
  std::size_t sim_pretrain_epochs = 10;
  std::size_t sim_embed_dim = 32;
  std::size_t sim_relation_dim = 64;
  std::size_t disc_hidden = 32;

  // Main classifier
  double cls_lr = 0.005;
  std::size_t cls_batch = 128;
  std::size_t cls_epochs = 50;
  std::size_t cls_embed_dim = 96;

  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t eval_batches = 50;
  std::size_t similarity_tile = 64;

  void validate() const {
    if (alpha < 0.0) throw config_error("train config: alpha must be >= 0");
    if (beta < 0.0) throw config_error("train config: beta must be >= 0");
    if (sim_cm < 1 || sim_batch < 1 || sim_batch % sim_cm != 0)
      throw config_error("train config: sim_cm must divide sim_batch");
    if (sim_lr < 0.0 || cls_lr < 0.0) throw config_error("train config: learning rates must be >= 0");
    if (momentum < 0.0 || momentum >= 1.0)
      throw config_error("train config: momentum must be in [0, 1)");
    if (weight_decay < 0.0) throw config_error("train config: weight_decay must be >= 0");
    if (sim_embed_dim < 1 || sim_relation_dim < 1 || disc_hidden < 1 || cls_embed_dim < 1)
      throw config_error("train config: layer widths must be >= 1");
    if (cls_batch < 1) throw config_error("train config: cls_batch must be >= 1");
    if (eval_batches < 1) throw config_error("train config: eval_batches must be >= 1");
    if (similarity_tile < 1) throw config_error("train config: similarity_tile must be >= 1");
  }
};

}  // namespace weakshot
