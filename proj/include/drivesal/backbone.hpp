#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drivesal/tensor.hpp"

namespace drivesal {

struct BackboneConfig {
  int input_h = 48;
  int input_w = 64;
  std::array<int, 5> block_channels{8, 16, 32, 32, 32};
  int feature_channels = 32;
  int dilation_last = 2;

  void validate() const;  // ConfigError on violation
  int feature_h() const { return input_h / 8; }
  int feature_w() const { return input_w / 8; }
};

// Truncated VGG-16-shaped stack: conv counts 2-2-3-3-3, halving pools after
// blocks 1-3. Block 4 keeps its resolution (stride-1 pool) and ends in a
// dilated conv; block 5 is fully dilated with no pool. Output is 1/8 the
// input in each spatial axis.
class Backbone {
 public:
  Backbone(const BackboneConfig& config, std::uint64_t seed);

  Tensor extract(const Tensor& image) const;

  const BackboneConfig& config() const { return cfg_; }
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;

 private:
  struct Conv {
    Tensor kernel;  // [3,3,Cin,Cout]
    Tensor bias;    // [Cout]
    int dilation = 1;
  };

  BackboneConfig cfg_;
  std::vector<std::vector<Conv>> blocks_;
};

}  // namespace drivesal
