#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "weakshot/similarity.hpp"
#include "weakshot/simnet.hpp"

namespace weakshot {

// Per-sample weights of one category. raw[i] is the mean symmetrized similarity of
// sample i to all category-mates (self included); normalized has unit mean.
struct SampleWeights {
  std::vector<double> raw;
  std::vector<double> normalized;

  std::size_t size() const { return raw.size(); }
};

SimilarityMatrix category_similarity_matrix(const SimNetModel& model,
                                            const Matrix& category_features,
                                            std::size_t tile = 64);

SampleWeights compute_sample_weights(const SimilarityMatrix& s);

// Same computation as category_similarity_matrix, on an arbitrary mixed mini-batch.
SimilarityMatrix batch_similarity(const SimNetModel& model, const Matrix& batch_features,
                                  std::size_t tile = 64);

// Ground-truth same-category indicator. Test-side only: it consumes true labels.
SimilarityMatrix oracle_similarity(std::span<const int> true_labels);

// File format: category_id,index,raw_weight,normalized_weight per line.
void save_weights(const std::map<int, SampleWeights>& weights, const std::string& path);
std::map<int, SampleWeights> load_weights(const std::string& path);

}  // namespace weakshot
