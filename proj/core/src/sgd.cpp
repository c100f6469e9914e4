#include "weakshot/sgd.hpp"

#include <string>

#include "weakshot/errors.hpp"

namespace weakshot {

SgdState SgdState::for_params(const MlpParams& params, double lr, double momentum,
                              double weight_decay) {
  if (lr < 0.0) throw config_error("sgd: lr must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) throw config_error("sgd: momentum must be in [0, 1)");
  if (weight_decay < 0.0) throw config_error("sgd: weight_decay must be >= 0");
  SgdState s;
  s.lr = lr;
  s.momentum = momentum;
  s.weight_decay = weight_decay;
  s.velocity = MlpGrads::zeros_like(params);
  return s;
}

void sgd_step(MlpParams& params, const MlpGrads& grads, SgdState& state) {
  if (params.layers.size() != grads.layers.size() ||
      params.layers.size() != state.velocity.layers.size())
    throw shape_error("sgd_step: layer count mismatch");
  if (state.lr == 0.0) return;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    auto& layer = params.layers[k];
    const auto& g = grads.layers[k];
    auto& v = state.velocity.layers[k];
    check_same_shape(layer.weight, g.weight, "sgd_step");
    const std::size_t nw = layer.weight.data.size();
    for (std::size_t t = 0; t < nw; ++t) {
      v.weight.data[t] = state.momentum * v.weight.data[t] + g.weight.data[t] +
                         state.weight_decay * layer.weight.data[t];
      layer.weight.data[t] -= state.lr * v.weight.data[t];
    }
    if (layer.bias.size() != g.bias.size())
      throw shape_error("sgd_step: bias size mismatch at layer " + std::to_string(k));
    for (std::size_t t = 0; t < layer.bias.size(); ++t) {
      v.bias[t] = state.momentum * v.bias[t] + g.bias[t] + state.weight_decay * layer.bias[t];
      layer.bias[t] -= state.lr * v.bias[t];
    }
  }
}

}  // namespace weakshot
