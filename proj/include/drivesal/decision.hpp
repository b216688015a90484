#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drivesal/tensor.hpp"

namespace drivesal {

struct DecisionConfig {
  int input_h = 48;
  int input_w = 64;
  int input_downsample = 8;  // average-pool factor before flattening
  int hidden1 = 128;
  int hidden2 = 64;
  double threshold = 0.5;

  void validate() const;
  int flat_size() const { return (input_h / input_downsample) * (input_w / input_downsample); }
};

struct BrakeDecision {
  double probability = 0.0;
  bool brake = false;
};

// Saliency map -> brake probability: average-pool, flatten, then
// dense(h1) -> relu -> dense(h2) -> relu -> dense(1) -> sigmoid.
class DecisionHead {
 public:
  DecisionHead(const DecisionConfig& config, std::uint64_t seed);

  Tensor forward(const Tensor& map) const;  // -> [1], stays on the graph
  BrakeDecision decide(const Tensor& map) const;

  const DecisionConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;

  void save(const std::string& path) const;
  static DecisionHead load(const std::string& path);

 private:
  DecisionConfig config_;
  std::uint64_t seed_ = 0;
  Tensor w1_, b1_, w2_, b2_, w3_, b3_;
};

struct DecisionTrainLog {
  std::vector<double> epoch_loss;  // mean bce per epoch
};

// Per-sample gradient descent on bce_loss over shuffled samples.
// Labels must be 0/1 and both classes present.
DecisionTrainLog train_decision(DecisionHead& head,
                                const std::vector<std::pair<Tensor, int>>& dataset, int epochs,
                                double lr, std::uint64_t seed);

}  // namespace drivesal
