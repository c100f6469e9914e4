#pragma once

#include <string>

#include "weakshot/matrix.hpp"

namespace weakshot {

enum class SimilaritySource { simnet, euclidean, cosine, oracle };

std::string to_string(SimilaritySource source);
SimilaritySource similarity_source_from_string(const std::string& s);

// Square matrix of non-negative pairwise similarities, tagged with how it was produced.
struct SimilarityMatrix {
  Matrix values;
  SimilaritySource source = SimilaritySource::simnet;

  std::size_t n() const { return values.rows; }
};

}  // namespace weakshot
