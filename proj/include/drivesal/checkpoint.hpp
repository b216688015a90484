#pragma once

#include <string>
#include <utility>
#include <vector>

#include "drivesal/tensor.hpp"

namespace drivesal {

// File layout: one JSON header line (caller metadata plus the tensor table),
// then each tensor's values as little-endian f64 in table order.
struct TensorBlob {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;
};

struct Checkpoint {
  std::string meta_json;  // caller-controlled header block, verbatim
  std::vector<TensorBlob> tensors;
};

void save_checkpoint(const std::string& path, const std::string& meta_json,
                     const std::vector<std::pair<std::string, Tensor>>& tensors);

Checkpoint load_checkpoint(const std::string& path);

// Copies blob values into the matching tensors. Names and shapes must match
// one to one in both directions.
void apply_checkpoint(const Checkpoint& checkpoint,
                      const std::vector<std::pair<std::string, Tensor>>& tensors);

}  // namespace drivesal
