#include "weakshot/config.hpp"

#include <fstream>
#include <sstream>

#include "weakshot/errors.hpp"
#include "weakshot/text.hpp"

namespace weakshot {

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const std::size_t eq = content.find('=');
    if (eq == std::string_view::npos)
      throw parse_error(origin + ": line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(content.substr(0, eq)));
    const std::string value(trim(content.substr(eq + 1)));
    if (key.empty())
      throw parse_error(origin + ": line " + std::to_string(line_no) + ": empty key");
    if (cfg.values_.count(key))
      throw parse_error(origin + ": line " + std::to_string(line_no) + ": duplicate key '" + key +
                        "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0;
  if (!parse_double(it->second, v))
    throw config_error("config key '" + key + "': bad number '" + it->second + "'");
  return v;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long long v = 0;
  if (!parse_long(it->second, v))
    throw config_error("config key '" + key + "': bad integer '" + it->second + "'");
  return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (res.ec != std::errc() || res.ptr != it->second.data() + it->second.size())
    throw config_error("config key '" + key + "': bad unsigned integer '" + it->second + "'");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw config_error("config key '" + key + "': bad boolean '" + it->second + "'");
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (std::string_view field : split_fields(it->second, ',')) {
    double v = 0;
    if (!parse_double(trim(field), v))
      throw config_error("config key '" + key + "': bad number '" + std::string(field) + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint64_t> Config::get_u64_list(const std::string& key,
                                                const std::vector<std::uint64_t>& fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::uint64_t> out;
  for (std::string_view raw : split_fields(it->second, ',')) {
    const std::string_view field = trim(raw);
    std::uint64_t v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
      throw config_error("config key '" + key + "': bad unsigned integer '" + std::string(field) +
                         "'");
    out.push_back(v);
  }
  return out;
}

void Config::check_unknown_keys() const {
  std::string unknown;
  for (const auto& [key, value] : values_)
    if (!consumed_.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += "'" + key + "'";
    }
  if (!unknown.empty()) throw config_error("unknown config keys: " + unknown);
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [key, value] : values_) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

std::uint64_t Config::hash() const { return fnv1a_hash(serialize()); }

}  // namespace weakshot
