#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <vector>

#include "doctest.h"
#include "weakshot/denoise.hpp"
#include "weakshot/rng.hpp"

using namespace weakshot;

TEST_CASE("sample weights from a hand-computed similarity matrix") {
  SimilarityMatrix s;
  s.values = Matrix{{1.0, 0.8, 0.0}, {0.8, 1.0, 0.2}, {0.0, 0.2, 1.0}};

  const SampleWeights w = compute_sample_weights(s);
  REQUIRE(w.size() == 3);
  CHECK(w.raw[0] == doctest::Approx(0.6));
  CHECK(w.raw[1] == doctest::Approx(2.0 / 3.0));
  CHECK(w.raw[2] == doctest::Approx(0.4));
  CHECK(w.normalized[0] == doctest::Approx(1.08));
  CHECK(w.normalized[1] == doctest::Approx(1.2));
  CHECK(w.normalized[2] == doctest::Approx(0.72));
}

TEST_CASE("asymmetric similarities are symmetrized first") {
  SimilarityMatrix s;
  s.values = Matrix{{1.0, 0.4}, {0.8, 1.0}};
  const SampleWeights w = compute_sample_weights(s);
  CHECK(w.raw[0] == doctest::Approx(0.8));  // mean of 1 and (0.4+0.8)/2
  CHECK(w.raw[1] == doctest::Approx(0.8));
  CHECK(w.normalized[0] == doctest::Approx(1.0));
  CHECK(w.normalized[1] == doctest::Approx(1.0));
}

TEST_CASE("normalized weights always have unit mean") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(40);
    SimilarityMatrix s;
    s.values = Matrix(n, n);
    for (double& v : s.values.data) v = rng.uniform();
    const SampleWeights w = compute_sample_weights(s);
    double mean = 0.0;
    for (double v : w.normalized) mean += v;
    mean /= static_cast<double>(n);
    CHECK(std::abs(mean - 1.0) < 1e-9);
  }
}

TEST_CASE("oracle similarity is exact label equality") {
  // Callers give outliers unique negative ids so they match nothing.
  const std::vector<int> labels = {3, 3, -3, 5, -5};
  const SimilarityMatrix s = oracle_similarity(labels);
  CHECK(s.source == SimilaritySource::oracle);
  CHECK(s.n() == 5);
  CHECK(s.values(0, 1) == 1.0);
  CHECK(s.values(1, 0) == 1.0);
  CHECK(s.values(0, 3) == 0.0);
  CHECK(s.values(2, 4) == 0.0);
  CHECK(s.values(2, 3) == 0.0);
  for (std::size_t i = 0; i < 5; ++i) CHECK(s.values(i, i) == 1.0);
}

TEST_CASE("model similarity matrices are bounded, tile-invariant and score-equal") {
  Rng rng(2);
  const SimNetModel model = make_simnet(6, 8, 12, rng);
  Matrix x(11, 6);
  for (double& v : x.data) v = rng.normal();

  const SimilarityMatrix s = category_similarity_matrix(model, x, 4);
  CHECK(s.source == SimilaritySource::simnet);
  CHECK(s.n() == 11);
  for (double v : s.values.data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  // Raw directed scores; symmetrization is the weight computation's job.
  CHECK(s.values == pair_scores(model, x));

  const SimilarityMatrix untiled = category_similarity_matrix(model, x, 64);
  CHECK(untiled.values == s.values);

  const SimilarityMatrix batch = batch_similarity(model, x, 3);
  CHECK(batch.values == s.values);
}

TEST_CASE("weights save and load round-trip") {
  std::map<int, SampleWeights> weights;
  weights[4] = SampleWeights{{0.5, 0.7}, {5.0 / 6.0, 7.0 / 6.0}};
  weights[7] = SampleWeights{{0.25}, {1.0}};

  const std::string path =
      (std::filesystem::temp_directory_path() / "wk_weights_roundtrip.csv").string();
  save_weights(weights, path);
  const std::map<int, SampleWeights> back = load_weights(path);

  REQUIRE(back.size() == 2);
  REQUIRE(back.count(4) == 1);
  CHECK(back.at(4).raw == weights.at(4).raw);
  CHECK(back.at(4).normalized == weights.at(4).normalized);
  CHECK(back.at(7).raw == weights.at(7).raw);
  std::remove(path.c_str());
}
