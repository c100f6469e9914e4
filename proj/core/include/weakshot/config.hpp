#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace weakshot {

// Flat `key = value` store. Lines starting with # are comments. Every key must be
// consumed by a typed getter; check_unknown_keys() turns leftovers (typos) into errors.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key,
                                          const std::vector<std::uint64_t>& fallback) const;

  void check_unknown_keys() const;  // config_error naming every never-read key

  std::string serialize() const;  // sorted `key = value` lines; parse(serialize()) is a fixed point
  std::uint64_t hash() const;     // FNV-1a over serialize()

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace weakshot
