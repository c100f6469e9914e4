#include <benchmark/benchmark.h>

#include "weakshot/dataset.hpp"
#include "weakshot/denoise.hpp"
#include "weakshot/simnet.hpp"

namespace {

using namespace weakshot;

Matrix random_features(std::size_t rows, Rng& rng) {
  Matrix m(rows, 32);
  for (double& v : m.data) v = rng.normal();
  return m;
}

// One training-step forward at the default episode size (M=100 -> 10000 pairs).
void BM_RelationForward(benchmark::State& state) {
  Rng rng(1);
  const SimNetModel model = make_simnet(32, 32, 64, rng);
  const Matrix x = random_features(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) {
    RelationForward rf = relation_forward(model, x);
    benchmark::DoNotOptimize(rf.scores.data.data());
  }
}
BENCHMARK(BM_RelationForward)->Arg(50)->Arg(100);

void BM_PairScoresTiled(benchmark::State& state) {
  Rng rng(2);
  const SimNetModel model = make_simnet(32, 32, 64, rng);
  const Matrix x = random_features(100, rng);
  const std::size_t tile = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    Matrix s = pair_scores(model, x, tile);
    benchmark::DoNotOptimize(s.data.data());
  }
}
// tile >= M^2 degenerates to a single block, the untiled reference point.
BENCHMARK(BM_PairScoresTiled)->Arg(16)->Arg(64)->Arg(10000);

void BM_SampleBalancedBatch(benchmark::State& state) {
  DatasetSpec spec;
  spec.seed = 7;
  const Dataset ds = generate_dataset(spec);
  const DataView view = make_view(ds, Split::base_train);
  Rng rng(3);
  for (auto _ : state) {
    PairBatch b = sample_balanced_batch(view, 10, 100, rng);
    benchmark::DoNotOptimize(b.features.data.data());
  }
}
BENCHMARK(BM_SampleBalancedBatch);

void BM_CategoryWeights(benchmark::State& state) {
  Rng rng(4);
  const SimNetModel model = make_simnet(32, 32, 64, rng);
  const Matrix feats = random_features(100, rng);
  for (auto _ : state) {
    const SimilarityMatrix s = category_similarity_matrix(model, feats);
    SampleWeights w = compute_sample_weights(s);
    benchmark::DoNotOptimize(w.normalized.data());
  }
}
BENCHMARK(BM_CategoryWeights);

}  // namespace
