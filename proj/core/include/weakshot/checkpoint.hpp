#pragma once

#include <string>
#include <vector>

#include "weakshot/mlp.hpp"

namespace weakshot {

struct NamedTensor {
  std::string name;
  Matrix value;
};

// Text format, one tensor per line: name,rows,cols,v0,v1,...  Round-trip exact.
void save_checkpoint(const std::vector<NamedTensor>& tensors, const std::string& path);
std::vector<NamedTensor> load_checkpoint(const std::string& path);

// Flattens an MLP as <prefix>.<layer>.weight / <prefix>.<layer>.bias (bias as a 1-row tensor).
void append_mlp_tensors(std::vector<NamedTensor>& out, const std::string& prefix,
                        const MlpParams& params);
// Fills params (whose architecture must already match) from tensors with the given prefix.
void read_mlp_tensors(const std::vector<NamedTensor>& tensors, const std::string& prefix,
                      MlpParams& params);

}  // namespace weakshot
