#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "weakshot/matrix.hpp"
#include "weakshot/rng.hpp"

namespace weakshot {

enum class Activation { identity, relu, sigmoid };

struct MlpLayer {
  Matrix weight;             // out x in
  std::vector<double> bias;  // out
  Activation activation = Activation::identity;
};

/// Parameters of a fully-connected network. Layers chain: the output
/// dimension of layer k equals the input dimension of layer k+1.
struct MlpParams {
  std::vector<MlpLayer> layers;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
  void validate() const;  // throws shape_error on broken chaining
};

/// Builds an MLP with the given layer widths; activations[k] applies to
/// layer k. Weights are zero until an init function fills them.
MlpParams make_mlp(const std::vector<std::size_t>& widths,
                   const std::vector<Activation>& activations);

/// Glorot-style uniform init in [-sqrt(6/(fan_in+fan_out)), +...], zero biases.
void glorot_init(MlpParams& params, Rng& rng);

/// Forward pass activations. values[0] is the input batch; values[k+1] is the
/// post-activation output of layer k; values.back() is the network output.
struct MlpActivations {
  std::vector<Matrix> values;
  const Matrix& output() const { return values.back(); }
};

MlpActivations mlp_forward(const MlpParams& params, const Matrix& x);

struct MlpGrads {
  struct LayerGrads {
    Matrix weight;
    std::vector<double> bias;
  };
  std::vector<LayerGrads> layers;

  void accumulate_scaled(const MlpGrads& other, double scale);
  static MlpGrads zeros_like(const MlpParams& params);
};

struct MlpBackwardResult {
  MlpGrads grads;
  Matrix input_grad;  // dL/dx, same shape as the input batch
};

/// Backpropagation through activations produced by mlp_forward on the same
/// params. output_grad is dL/d(output).
MlpBackwardResult mlp_backward(const MlpParams& params, const MlpActivations& acts,
                               const Matrix& output_grad);

// Flat parameter views, used by the optimizer-agnostic gradient checker and
// the checkpoint writer.
std::vector<double> flatten(const MlpParams& params);
std::vector<double> flatten(const MlpGrads& grads);
void unflatten(MlpParams& params, std::span<const double> flat);

}  // namespace weakshot
