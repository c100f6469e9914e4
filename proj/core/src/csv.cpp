#include "weakshot/csv.hpp"

#include "weakshot/errors.hpp"
#include "weakshot/text.hpp"

namespace weakshot {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), file_(path), width_(header.size()) {
  if (!file_) throw io_error("cannot open '" + path + "' for writing");
  if (header.empty()) throw config_error("csv: header must not be empty");
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_)
    throw config_error("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(width_));
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  file_ << line;
  if (!file_) throw io_error("failed writing '" + path_ + "'");
}

void CsvWriter::close() {
  if (!file_.is_open()) return;
  file_.close();
  if (!file_) throw io_error("failed writing '" + path_ + "'");
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for reading");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    const std::string_view content = trim(line);
    if (content.empty()) continue;
    std::vector<std::string> cells;
    for (std::string_view field : split_fields(content, ',')) cells.emplace_back(field);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace weakshot
