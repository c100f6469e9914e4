#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace weakshot {

// Minimal CSV writer; every row must match the header width. Values never contain
// commas or quotes in this project, so no quoting is implemented.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::string path_;
  std::ofstream file_;
  std::size_t width_;
};

// Reads a whole CSV back, header included.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace weakshot
