#include "weakshot/checkpoint.hpp"

#include <algorithm>
#include <fstream>

#include "weakshot/errors.hpp"
#include "weakshot/text.hpp"

namespace weakshot {

void save_checkpoint(const std::vector<NamedTensor>& tensors, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  std::string line;
  for (const NamedTensor& t : tensors) {
    if (t.name.find(',') != std::string::npos)
      throw io_error("tensor name '" + t.name + "' contains a comma");
    line.clear();
    line += t.name;
    line += ',';
    line += std::to_string(t.value.rows);
    line += ',';
    line += std::to_string(t.value.cols);
    for (double v : t.value.data) {
      line += ',';
      line += fmt_double(v);
    }
    line += '\n';
    f << line;
  }
  f.flush();
  if (!f) throw io_error("failed writing '" + path + "'");
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for reading");
  std::vector<NamedTensor> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) {
      if (f.eof()) break;
      throw parse_error(path + ": line " + std::to_string(line_no) + ": empty line");
    }
    const auto fields = split_fields(content, ',');
    if (fields.size() < 3)
      throw parse_error(path + ": line " + std::to_string(line_no) + ": expected name,rows,cols,...");
    long long rows = 0, cols = 0;
    if (!parse_long(fields[1], rows) || !parse_long(fields[2], cols) || rows < 0 || cols < 0)
      throw parse_error(path + ": line " + std::to_string(line_no) + ": bad tensor shape");
    const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    if (fields.size() != 3 + n)
      throw parse_error(path + ": line " + std::to_string(line_no) + ": expected " +
                        std::to_string(3 + n) + " fields, got " + std::to_string(fields.size()));
    NamedTensor t;
    t.name = std::string(fields[0]);
    t.value = Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (std::size_t i = 0; i < n; ++i)
      if (!parse_double(fields[3 + i], t.value.data[i]))
        throw parse_error(path + ": line " + std::to_string(line_no) + ": bad number '" +
                          std::string(fields[3 + i]) + "'");
    out.push_back(std::move(t));
  }
  return out;
}

void append_mlp_tensors(std::vector<NamedTensor>& out, const std::string& prefix,
                        const MlpParams& params) {
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const MlpLayer& layer = params.layers[k];
    out.push_back({prefix + "." + std::to_string(k) + ".weight", layer.weight});
    Matrix bias(1, layer.bias.size());
    std::copy(layer.bias.begin(), layer.bias.end(), bias.data.begin());
    out.push_back({prefix + "." + std::to_string(k) + ".bias", std::move(bias)});
  }
}

namespace {

const Matrix& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
  for (const NamedTensor& t : tensors)
    if (t.name == name) return t.value;
  throw parse_error("checkpoint is missing tensor '" + name + "'");
}

}  // namespace

void read_mlp_tensors(const std::vector<NamedTensor>& tensors, const std::string& prefix,
                      MlpParams& params) {
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    MlpLayer& layer = params.layers[k];
    const std::string base = prefix + "." + std::to_string(k);
    const Matrix& w = find_tensor(tensors, base + ".weight");
    check_same_shape(layer.weight, w, "read_mlp_tensors");
    layer.weight = w;
    const Matrix& b = find_tensor(tensors, base + ".bias");
    if (b.rows != 1 || b.cols != layer.bias.size())
      throw shape_error("read_mlp_tensors: bias shape mismatch for " + base);
    std::copy(b.data.begin(), b.data.end(), layer.bias.begin());
  }
}

}  // namespace weakshot
