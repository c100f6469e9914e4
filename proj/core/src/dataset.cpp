#include "weakshot/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "weakshot/errors.hpp"
#include "weakshot/rng.hpp"
#include "weakshot/text.hpp"

namespace weakshot {

std::string to_string(Split s) {
  switch (s) {
    case Split::base_train: return "base_train";
    case Split::base_test: return "base_test";
    case Split::novel_train: return "novel_train";
    case Split::novel_test: return "novel_test";
  }
  throw parse_error("unknown split value");
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::flip: return "flip";
    case NoiseKind::outlier: return "outlier";
  }
  throw parse_error("unknown noise kind value");
}

Split split_from_string(const std::string& s) {
  if (s == "base_train") return Split::base_train;
  if (s == "base_test") return Split::base_test;
  if (s == "novel_train") return Split::novel_train;
  if (s == "novel_test") return Split::novel_test;
  throw parse_error("unknown split '" + s + "'");
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "flip") return NoiseKind::flip;
  if (s == "outlier") return NoiseKind::outlier;
  throw parse_error("unknown noise kind '" + s + "'");
}

void DatasetSpec::validate() const {
  if (n_base_categories < 1) throw config_error("dataset spec: need at least one base category");
  if (n_novel_categories < 1) throw config_error("dataset spec: need at least one novel category");
  if (dim < 1) throw config_error("dataset spec: dim must be >= 1");
  if (base_train_per_category < 1 || novel_train_per_category < 1 || test_per_category < 1)
    throw config_error("dataset spec: per-category counts must be >= 1");
  if (n_superclusters < 1) throw config_error("dataset spec: need at least one supercluster");
  if (intra_category_std < 0.0) throw config_error("dataset spec: intra_category_std must be >= 0");
  if (inter_category_std <= 0.0) throw config_error("dataset spec: inter_category_std must be > 0");
  if (supercluster_std <= 0.0) throw config_error("dataset spec: supercluster_std must be > 0");
  if (intra_category_std >= inter_category_std)
    throw config_error("dataset spec: intra_category_std must be < inter_category_std");
}

void NoiseSpec::validate() const {
  if (ratio < 0.0 || ratio >= 1.0) throw config_error("noise spec: ratio must be in [0, 1)");
  if (flip_fraction < 0.0 || flip_fraction > 1.0)
    throw config_error("noise spec: flip_fraction must be in [0, 1]");
}

std::vector<int> Dataset::categories_of(Split s) const {
  std::set<int> cats;
  for (const auto& r : records)
    if (r.split == s) cats.insert(r.label);
  return std::vector<int>(cats.begin(), cats.end());
}

std::size_t DataView::min_category_count() const {
  std::size_t lo = static_cast<std::size_t>(-1);
  for (const auto& [cat, rows] : by_category) lo = std::min(lo, rows.size());
  return by_category.empty() ? 0 : lo;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  Matrix centers(spec.n_superclusters, spec.dim);
  for (double& v : centers.data) v = rng.normal(0.0, spec.supercluster_std);

  // Categories are assigned to superclusters round-robin.
  const std::size_t n_cats = spec.n_categories();
  Matrix protos(n_cats, spec.dim);
  for (std::size_t c = 0; c < n_cats; ++c) {
    const double* center = centers.row(c % spec.n_superclusters);
    double* p = protos.row(c);
    for (std::size_t d = 0; d < spec.dim; ++d)
      p[d] = center[d] + rng.normal(0.0, spec.inter_category_std);
  }

  Dataset ds;
  ds.dim = spec.dim;
  auto emit = [&](int cat, Split split, std::size_t count) {
    const double* p = protos.row(static_cast<std::size_t>(cat));
    for (std::size_t k = 0; k < count; ++k) {
      Record r;
      r.feature.resize(spec.dim);
      for (std::size_t d = 0; d < spec.dim; ++d)
        r.feature[d] = p[d] + rng.normal(0.0, spec.intra_category_std);
      r.label = r.true_label = cat;
      r.split = split;
      ds.records.push_back(std::move(r));
    }
  };
  const int cb = static_cast<int>(spec.n_base_categories);
  const int cn = static_cast<int>(spec.n_novel_categories);
  for (int c = 0; c < cb; ++c) emit(c, Split::base_train, spec.base_train_per_category);
  for (int c = 0; c < cb; ++c) emit(c, Split::base_test, spec.test_per_category);
  for (int c = cb; c < cb + cn; ++c) emit(c, Split::novel_train, spec.novel_train_per_category);
  for (int c = cb; c < cb + cn; ++c) emit(c, Split::novel_test, spec.test_per_category);

  ds.meta = GenMeta{std::move(protos), spec.intra_category_std, spec.inter_category_std};
  return ds;
}

Dataset inject_web_noise(const Dataset& dataset, const NoiseSpec& noise) {
  noise.validate();
  Dataset out = dataset;
  if (noise.ratio == 0.0) return out;

  const std::vector<int> novel_cats = out.categories_of(Split::novel_train);
  if (novel_cats.empty()) throw config_error("inject_web_noise: dataset has no novel_train records");
  if (novel_cats.size() < 2 && noise.flip_fraction > 0.0)
    throw config_error("inject_web_noise: label flips need at least two novel categories");
  if (!out.meta)
    throw config_error("inject_web_noise: dataset lacks generation metadata (prototypes)");
  const GenMeta& meta = *out.meta;

  // Outliers are drawn uniformly from the prototype bounding box inflated by 3 sigma.
  std::vector<double> lo(out.dim), hi(out.dim);
  for (std::size_t d = 0; d < out.dim; ++d) {
    double mn = meta.prototypes(0, d), mx = meta.prototypes(0, d);
    for (std::size_t c = 1; c < meta.prototypes.rows; ++c) {
      mn = std::min(mn, meta.prototypes(c, d));
      mx = std::max(mx, meta.prototypes(c, d));
    }
    lo[d] = mn - 3.0 * meta.inter_category_std;
    hi[d] = mx + 3.0 * meta.inter_category_std;
  }

  Rng rng(noise.seed);
  for (std::size_t ci = 0; ci < novel_cats.size(); ++ci) {
    const int cat = novel_cats[ci];
    const int flip_target = novel_cats[(ci + 1) % novel_cats.size()];
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < out.records.size(); ++i)
      if (out.records[i].split == Split::novel_train && out.records[i].label == cat)
        rows.push_back(i);

    const auto n = static_cast<double>(rows.size());
    const auto n_noisy = static_cast<std::size_t>(std::lround(noise.ratio * n));
    const auto n_flip =
        static_cast<std::size_t>(std::lround(noise.flip_fraction * static_cast<double>(n_noisy)));
    const std::vector<std::size_t> picked = rng.sample_without_replacement(rows.size(), n_noisy);

    for (std::size_t k = 0; k < picked.size(); ++k) {
      Record& r = out.records[rows[picked[k]]];
      if (k < n_flip) {
        const double* p = meta.prototypes.row(static_cast<std::size_t>(flip_target));
        for (std::size_t d = 0; d < out.dim; ++d)
          r.feature[d] = p[d] + rng.normal(0.0, meta.intra_category_std);
        r.true_label = flip_target;
        r.noise_kind = NoiseKind::flip;
      } else {
        for (std::size_t d = 0; d < out.dim; ++d) r.feature[d] = rng.uniform(lo[d], hi[d]);
        r.true_label = -1;
        r.noise_kind = NoiseKind::outlier;
      }
    }
  }
  return out;
}

std::size_t split_validation(std::size_t n_base, std::size_t n_novel) {
  if (n_base + n_novel == 0) return 0;
  return n_novel * n_base / (n_base + n_novel);
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f << "dim=" << dataset.dim << "\n";
  std::string line;
  for (const Record& r : dataset.records) {
    line.clear();
    line += to_string(r.split);
    line += ',';
    line += std::to_string(r.label);
    line += ',';
    line += std::to_string(r.true_label);
    line += ',';
    line += to_string(r.noise_kind);
    for (double v : r.feature) {
      line += ',';
      line += fmt_double(v);
    }
    line += '\n';
    f << line;
  }
  f.flush();
  if (!f) throw io_error("failed writing '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(f, line)) throw parse_error(path + ": line 1: missing dim=<D> header");
  line = std::string(trim(line));
  if (line.rfind("dim=", 0) != 0) throw parse_error(path + ": line 1: expected dim=<D> header");
  long long dim_val = 0;
  if (!parse_long(std::string_view(line).substr(4), dim_val) || dim_val < 1)
    throw parse_error(path + ": line 1: bad dimension '" + line.substr(4) + "'");

  Dataset ds;
  ds.dim = static_cast<std::size_t>(dim_val);
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) {
      if (f.eof()) break;
      throw parse_error(path + ": line " + std::to_string(line_no) + ": empty line");
    }
    const auto fields = split_fields(content, ',');
    const std::size_t expected = 4 + ds.dim;
    if (fields.size() != expected)
      throw parse_error(path + ": line " + std::to_string(line_no) + ": expected " +
                        std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
    Record r;
    try {
      r.split = split_from_string(std::string(fields[0]));
      r.noise_kind = noise_kind_from_string(std::string(fields[3]));
    } catch (const parse_error& e) {
      throw parse_error(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    long long label = 0, true_label = 0;
    if (!parse_long(fields[1], label) || !parse_long(fields[2], true_label))
      throw parse_error(path + ": line " + std::to_string(line_no) + ": bad category id");
    r.label = static_cast<int>(label);
    r.true_label = static_cast<int>(true_label);
    r.feature.resize(ds.dim);
    for (std::size_t d = 0; d < ds.dim; ++d)
      if (!parse_double(fields[4 + d], r.feature[d]))
        throw parse_error(path + ": line " + std::to_string(line_no) + ": bad number '" +
                          std::string(fields[4 + d]) + "'");
    ds.records.push_back(std::move(r));
  }
  return ds;
}

namespace {

DataView view_from_rows(const Dataset& dataset, const std::vector<std::size_t>& rows) {
  DataView v;
  v.features = Matrix(rows.size(), dataset.dim);
  v.labels.resize(rows.size());
  v.record_indices = rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Record& r = dataset.records[rows[i]];
    std::copy(r.feature.begin(), r.feature.end(), v.features.row(i));
    v.labels[i] = r.label;
    v.by_category[r.label].push_back(i);
  }
  return v;
}

}  // namespace

DataView make_view(const Dataset& dataset, Split split) {
  return make_view(dataset, std::vector<Split>{split});
}

DataView make_view(const Dataset& dataset, const std::vector<Split>& splits) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < dataset.records.size(); ++i)
    for (Split s : splits)
      if (dataset.records[i].split == s) {
        rows.push_back(i);
        break;
      }
  return view_from_rows(dataset, rows);
}

DataView make_view_categories(const Dataset& dataset, Split split, const std::vector<int>& categories,
                              std::size_t max_per_category) {
  const std::set<int> wanted(categories.begin(), categories.end());
  std::map<int, std::size_t> taken;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const Record& r = dataset.records[i];
    if (r.split != split || !wanted.count(r.label)) continue;
    if (taken[r.label] >= max_per_category) continue;
    ++taken[r.label];
    rows.push_back(i);
  }
  return view_from_rows(dataset, rows);
}

}  // namespace weakshot
