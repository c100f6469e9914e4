#pragma once

#include "weakshot/mlp.hpp"

namespace weakshot {

// Classic SGD with momentum; weight decay is folded into the gradient:
//   v <- momentum*v + g + weight_decay*p
//   p <- p - lr*v
struct SgdState {
  double lr = 0.01;
  double momentum = 0.0;
  double weight_decay = 0.0;
  MlpGrads velocity;

  static SgdState for_params(const MlpParams& params, double lr, double momentum,
                             double weight_decay);
};

// lr == 0 leaves params bit-identical (the update is skipped entirely).
void sgd_step(MlpParams& params, const MlpGrads& grads, SgdState& state);

}  // namespace weakshot
