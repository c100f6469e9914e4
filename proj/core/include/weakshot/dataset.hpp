#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weakshot/matrix.hpp"

namespace weakshot {

enum class Split { base_train, base_test, novel_train, novel_test };
enum class NoiseKind { none, flip, outlier };

std::string to_string(Split s);
std::string to_string(NoiseKind k);
Split split_from_string(const std::string& s);
NoiseKind noise_kind_from_string(const std::string& s);

// true_label is -1 for outliers: their content belongs to no category.
struct Record {
  std::vector<double> feature;
  int label = 0;
  int true_label = 0;
  Split split = Split::base_train;
  NoiseKind noise_kind = NoiseKind::none;

  bool is_noisy() const { return noise_kind != NoiseKind::none; }
  bool operator==(const Record&) const = default;
};

struct DatasetSpec {
  std::size_t n_base_categories = 15;
  std::size_t n_novel_categories = 5;
  std::size_t dim = 32;
  std::size_t base_train_per_category = 30;
  std::size_t novel_train_per_category = 100;
  std::size_t test_per_category = 30;
  std::size_t n_superclusters = 5;
  double intra_category_std = 0.8;
  double inter_category_std = 1.0;
  double supercluster_std = 2.5;
  std::uint64_t seed = 1;

  std::size_t n_categories() const { return n_base_categories + n_novel_categories; }
  void validate() const;
};

struct NoiseSpec {
  double ratio = 0.30;
  double flip_fraction = 0.8;
  std::uint64_t seed = 1;

  void validate() const;
};

// Category prototypes kept from generation; required to synthesize noise later.
struct GenMeta {
  Matrix prototypes;  // (C_b + C_n) x D, row index = category id
  double intra_category_std = 0.0;
  double inter_category_std = 0.0;
};

struct Dataset {
  std::size_t dim = 0;
  std::vector<Record> records;
  std::optional<GenMeta> meta;  // not serialized

  std::vector<int> categories_of(Split s) const;  // sorted unique labels
  bool operator==(const Dataset& other) const {
    return dim == other.dim && records == other.records;
  }
};

// What training code is allowed to see: features and labels only.
struct DataView {
  Matrix features;
  std::vector<int> labels;
  std::map<int, std::vector<std::size_t>> by_category;  // label -> row indices
  std::vector<std::size_t> record_indices;              // row -> dataset record index

  std::size_t size() const { return features.rows; }
  std::size_t min_category_count() const;
};

Dataset generate_dataset(const DatasetSpec& spec);
Dataset inject_web_noise(const Dataset& dataset, const NoiseSpec& noise);
std::size_t split_validation(std::size_t n_base, std::size_t n_novel);

void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

DataView make_view(const Dataset& dataset, Split split);
DataView make_view(const Dataset& dataset, const std::vector<Split>& splits);
// Restrict to the given categories, keeping at most max_per_category rows of each.
DataView make_view_categories(const Dataset& dataset, Split split, const std::vector<int>& categories,
                              std::size_t max_per_category = static_cast<std::size_t>(-1));

}  // namespace weakshot
