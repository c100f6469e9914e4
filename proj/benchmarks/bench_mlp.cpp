#include <benchmark/benchmark.h>

#include "weakshot/mlp.hpp"
#include "weakshot/rng.hpp"

namespace {

using namespace weakshot;

Matrix random_batch(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.normal();
  return m;
}

// Classifier shape: D -> E relu -> C logits on a full mini-batch.
MlpParams classifier_net(Rng& rng) {
  MlpParams p = make_mlp({32, 96, 5}, {Activation::relu, Activation::identity});
  glorot_init(p, rng);
  return p;
}

void BM_MlpForward(benchmark::State& state) {
  Rng rng(1);
  const MlpParams p = classifier_net(rng);
  const Matrix x = random_batch(static_cast<std::size_t>(state.range(0)), 32, rng);
  for (auto _ : state) {
    MlpActivations acts = mlp_forward(p, x);
    benchmark::DoNotOptimize(acts.output().data.data());
  }
}
BENCHMARK(BM_MlpForward)->Arg(128)->Arg(500);

void BM_MlpForwardBackward(benchmark::State& state) {
  Rng rng(2);
  const MlpParams p = classifier_net(rng);
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_batch(batch, 32, rng);
  const Matrix dout = random_batch(batch, 5, rng);
  for (auto _ : state) {
    const MlpActivations acts = mlp_forward(p, x);
    MlpBackwardResult back = mlp_backward(p, acts, dout);
    benchmark::DoNotOptimize(back.grads.layers.data());
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(128)->Arg(500);

}  // namespace
