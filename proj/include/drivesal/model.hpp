#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drivesal/backbone.hpp"
#include "drivesal/config.hpp"
#include "drivesal/dam.hpp"
#include "drivesal/priors.hpp"

namespace drivesal {

struct ModelConfig {
  BackboneConfig backbone;
  int attn_channels = 16;
  int seq_len = 4;
  PriorVariant variant{PriorKind::Gaussian, 16};

  void validate() const;
  static ModelConfig from_run(const RunConfig& run);
};

// Full pipeline: per-frame backbone features, attention over the ConvLSTM
// encodings, learnable prior channels, then a readout back to input
// resolution. One input frame runs static mode; otherwise the frame count
// must equal seq_len.
class SaliencyModel {
 public:
  SaliencyModel(const ModelConfig& config, std::uint64_t seed);

  Tensor predict(const std::vector<Tensor>& frames) const;  // -> [H,W,1]

  const ModelConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;

  void save(const std::string& path) const;
  static SaliencyModel load(const std::string& path);

 private:
  ModelConfig config_;
  std::uint64_t seed_ = 0;
  Backbone backbone_;
  Dam dam_;
  PriorBank priors_;
  Readout readout_;
};

}  // namespace drivesal
