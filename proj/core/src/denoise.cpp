#include "weakshot/denoise.hpp"

#include <cmath>
#include <fstream>

#include "weakshot/errors.hpp"
#include "weakshot/text.hpp"

namespace weakshot {

std::string to_string(SimilaritySource source) {
  switch (source) {
    case SimilaritySource::simnet: return "simnet";
    case SimilaritySource::euclidean: return "euclidean";
    case SimilaritySource::cosine: return "cosine";
    case SimilaritySource::oracle: return "oracle";
  }
  throw config_error("unknown similarity source");
}

SimilaritySource similarity_source_from_string(const std::string& s) {
  if (s == "simnet") return SimilaritySource::simnet;
  if (s == "euclidean") return SimilaritySource::euclidean;
  if (s == "cosine") return SimilaritySource::cosine;
  if (s == "oracle") return SimilaritySource::oracle;
  throw parse_error("unknown similarity source '" + s + "'");
}

SimilarityMatrix category_similarity_matrix(const SimNetModel& model,
                                            const Matrix& category_features, std::size_t tile) {
  if (category_features.rows < 1)
    throw shape_error("category_similarity_matrix: need at least one sample");
  SimilarityMatrix s;
  s.source = SimilaritySource::simnet;
  s.values = pair_scores(model, category_features, tile);
  return s;
}

SimilarityMatrix batch_similarity(const SimNetModel& model, const Matrix& batch_features,
                                  std::size_t tile) {
  if (batch_features.rows < 2) throw shape_error("batch_similarity: need at least two samples");
  SimilarityMatrix s;
  s.source = SimilaritySource::simnet;
  s.values = pair_scores(model, batch_features, tile);
  return s;
}

SampleWeights compute_sample_weights(const SimilarityMatrix& s) {
  const Matrix& v = s.values;
  if (v.rows != v.cols) throw shape_error("compute_sample_weights: similarity matrix not square");
  if (v.rows == 0) throw shape_error("compute_sample_weights: empty similarity matrix");
  const std::size_t n = v.rows;
  for (double x : v.data)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw numeric_error("compute_sample_weights: similarities must be finite and >= 0");

  SampleWeights w;
  w.raw.resize(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += (v(i, j) + v(j, i)) / 2.0;
    w.raw[i] = sum / static_cast<double>(n);
    mean += w.raw[i];
  }
  mean /= static_cast<double>(n);
  if (mean == 0.0)
    throw numeric_error("compute_sample_weights: degenerate all-zero similarity matrix");
  w.normalized.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.normalized[i] = w.raw[i] / mean;
  return w;
}

SimilarityMatrix oracle_similarity(std::span<const int> true_labels) {
  const std::size_t n = true_labels.size();
  SimilarityMatrix s;
  s.source = SimilaritySource::oracle;
  s.values = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      s.values(i, j) = true_labels[i] == true_labels[j] ? 1.0 : 0.0;
  return s;
}

void save_weights(const std::map<int, SampleWeights>& weights, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f << "category_id,index,raw_weight,normalized_weight\n";
  for (const auto& [cat, w] : weights)
    for (std::size_t i = 0; i < w.size(); ++i)
      f << cat << ',' << i << ',' << fmt_double(w.raw[i]) << ',' << fmt_double(w.normalized[i])
        << '\n';
  f.flush();
  if (!f) throw io_error("failed writing '" + path + "'");
}

std::map<int, SampleWeights> load_weights(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for reading");
  std::map<int, SampleWeights> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) {
      if (f.eof()) break;
      throw parse_error(path + ": line " + std::to_string(line_no) + ": empty line");
    }
    if (line_no == 1) continue;  // header
    const auto fields = split_fields(content, ',');
    if (fields.size() != 4)
      throw parse_error(path + ": line " + std::to_string(line_no) + ": expected 4 fields, got " +
                        std::to_string(fields.size()));
    long long cat = 0, idx = 0;
    double raw = 0, norm = 0;
    if (!parse_long(fields[0], cat) || !parse_long(fields[1], idx) ||
        !parse_double(fields[2], raw) || !parse_double(fields[3], norm))
      throw parse_error(path + ": line " + std::to_string(line_no) + ": bad value");
    SampleWeights& w = out[static_cast<int>(cat)];
    if (static_cast<std::size_t>(idx) != w.raw.size())
      throw parse_error(path + ": line " + std::to_string(line_no) +
                        ": indices must be dense and ascending per category");
    w.raw.push_back(raw);
    w.normalized.push_back(norm);
  }
  return out;
}

}  // namespace weakshot
