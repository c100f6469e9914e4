#include "weakshot/mlp.hpp"

#include <cmath>
#include <string>

#include "weakshot/errors.hpp"

namespace weakshot {

std::size_t MlpParams::input_dim() const {
  return layers.empty() ? 0 : layers.front().weight.cols;
}

std::size_t MlpParams::output_dim() const {
  return layers.empty() ? 0 : layers.back().weight.rows;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

void MlpParams::validate() const {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.bias.size() != l.weight.rows)
      throw shape_error("MlpParams: layer " + std::to_string(k) + " bias size " +
                        std::to_string(l.bias.size()) + " != out dim " +
                        std::to_string(l.weight.rows));
    if (k > 0 && layers[k - 1].weight.rows != l.weight.cols)
      throw shape_error("MlpParams: layer " + std::to_string(k - 1) + " out dim " +
                        std::to_string(layers[k - 1].weight.rows) + " != layer " +
                        std::to_string(k) + " in dim " + std::to_string(l.weight.cols));
  }
}

MlpParams make_mlp(const std::vector<std::size_t>& widths,
                   const std::vector<Activation>& activations) {
  if (widths.size() < 2) throw shape_error("make_mlp: need at least input and output widths");
  if (activations.size() != widths.size() - 1)
    throw shape_error("make_mlp: one activation per layer required");
  MlpParams p;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    MlpLayer layer;
    layer.weight = Matrix(widths[k + 1], widths[k]);
    layer.bias.assign(widths[k + 1], 0.0);
    layer.activation = activations[k];
    p.layers.push_back(std::move(layer));
  }
  return p;
}

void glorot_init(MlpParams& params, Rng& rng) {
  for (auto& l : params.layers) {
    const double fan_in = static_cast<double>(l.weight.cols);
    const double fan_out = static_cast<double>(l.weight.rows);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : l.weight.data) w = rng.uniform(-limit, limit);
    for (double& b : l.bias) b = 0.0;
  }
}

namespace {

void apply_activation(Matrix& z, Activation act) {
  switch (act) {
    case Activation::identity:
      break;
    case Activation::relu:
      for (double& v : z.data)
        if (v < 0.0) v = 0.0;
      break;
    case Activation::sigmoid:
      for (double& v : z.data) v = 1.0 / (1.0 + std::exp(-v));
      break;
  }
}

// delta <- delta (.) act'(post), using only post-activation values.
void apply_activation_grad(Matrix& delta, const Matrix& post, Activation act) {
  switch (act) {
    case Activation::identity:
      break;
    case Activation::relu:
      for (std::size_t i = 0; i < delta.size(); ++i)
        if (post.data[i] <= 0.0) delta.data[i] = 0.0;
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < delta.size(); ++i)
        delta.data[i] *= post.data[i] * (1.0 - post.data[i]);
      break;
  }
}

}  // namespace

MlpActivations mlp_forward(const MlpParams& params, const Matrix& x) {
  params.validate();
  if (params.layers.empty()) throw shape_error("mlp_forward: empty network");
  if (x.cols != params.input_dim())
    throw shape_error("mlp_forward: input dim " + std::to_string(x.cols) + " != expected " +
                      std::to_string(params.input_dim()));
  MlpActivations acts;
  acts.values.reserve(params.layers.size() + 1);
  acts.values.push_back(x);
  for (const auto& layer : params.layers) {
    Matrix z = matmul(acts.values.back(), transpose(layer.weight));
    for (std::size_t i = 0; i < z.rows; ++i) {
      double* zrow = z.row(i);
      for (std::size_t j = 0; j < z.cols; ++j) zrow[j] += layer.bias[j];
    }
    apply_activation(z, layer.activation);
    acts.values.push_back(std::move(z));
  }
  return acts;
}

MlpBackwardResult mlp_backward(const MlpParams& params, const MlpActivations& acts,
                               const Matrix& output_grad) {
  const std::size_t n_layers = params.layers.size();
  if (acts.values.size() != n_layers + 1)
    throw shape_error("mlp_backward: activations do not match network depth");
  check_same_shape(output_grad, acts.values.back(), "mlp_backward output_grad");

  MlpBackwardResult result;
  result.grads.layers.resize(n_layers);

  Matrix delta = output_grad;
  for (std::size_t k = n_layers; k-- > 0;) {
    const auto& layer = params.layers[k];
    const Matrix& input = acts.values[k];
    const Matrix& post = acts.values[k + 1];

    apply_activation_grad(delta, post, layer.activation);

    auto& lg = result.grads.layers[k];
    lg.weight = matmul_tn(delta, input);  // (B x out)^T * (B x in) -> out x in
    lg.bias.assign(layer.weight.rows, 0.0);
    for (std::size_t i = 0; i < delta.rows; ++i) {
      const double* drow = delta.row(i);
      for (std::size_t j = 0; j < delta.cols; ++j) lg.bias[j] += drow[j];
    }
    delta = matmul(delta, layer.weight);  // dL/d(input of layer k)
  }
  result.input_grad = std::move(delta);
  return result;
}

void MlpGrads::accumulate_scaled(const MlpGrads& other, double scale) {
  if (layers.size() != other.layers.size())
    throw shape_error("MlpGrads::accumulate_scaled: layer count mismatch");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    check_same_shape(layers[k].weight, other.layers[k].weight, "accumulate_scaled");
    for (std::size_t i = 0; i < layers[k].weight.size(); ++i)
      layers[k].weight.data[i] += scale * other.layers[k].weight.data[i];
    for (std::size_t i = 0; i < layers[k].bias.size(); ++i)
      layers[k].bias[i] += scale * other.layers[k].bias[i];
  }
}

MlpGrads MlpGrads::zeros_like(const MlpParams& params) {
  MlpGrads g;
  g.layers.resize(params.layers.size());
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    g.layers[k].weight = Matrix(params.layers[k].weight.rows, params.layers[k].weight.cols);
    g.layers[k].bias.assign(params.layers[k].bias.size(), 0.0);
  }
  return g;
}

std::vector<double> flatten(const MlpParams& params) {
  std::vector<double> flat;
  flat.reserve(params.parameter_count());
  for (const auto& l : params.layers) {
    flat.insert(flat.end(), l.weight.data.begin(), l.weight.data.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

std::vector<double> flatten(const MlpGrads& grads) {
  std::vector<double> flat;
  for (const auto& l : grads.layers) {
    flat.insert(flat.end(), l.weight.data.begin(), l.weight.data.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void unflatten(MlpParams& params, std::span<const double> flat) {
  if (flat.size() != params.parameter_count())
    throw shape_error("unflatten: size mismatch");
  std::size_t pos = 0;
  for (auto& l : params.layers) {
    for (double& w : l.weight.data) w = flat[pos++];
    for (double& b : l.bias) b = flat[pos++];
  }
}

}  // namespace weakshot
