#include "drivesal/decision.hpp"

#include <numeric>

#include "drivesal/checkpoint.hpp"
#include "drivesal/errors.hpp"
#include "drivesal/init.hpp"
#include "drivesal/losses.hpp"
#include "drivesal/rng.hpp"
#include "json.hpp"

namespace drivesal {

void DecisionConfig::validate() const {
  if (input_h < 1 || input_w < 1) throw ConfigError("decision: input extents must be positive");
  if (input_downsample < 1) throw ConfigError("decision: input_downsample must be >= 1");
  if (input_h % input_downsample != 0 || input_w % input_downsample != 0) {
    throw ConfigError("decision: input extents must be divisible by input_downsample");
  }
  if (hidden1 < 1 || hidden2 < 1) throw ConfigError("decision: hidden sizes must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("decision: threshold must be in (0,1)");
  }
}

DecisionHead::DecisionHead(const DecisionConfig& config, std::uint64_t seed)
    : config_(config), seed_(seed) {
  config_.validate();
  Rng rng(seed);
  const int flat = config_.flat_size();
  w1_ = he_tensor({flat, config_.hidden1}, flat, rng);
  b1_ = Tensor::zeros({config_.hidden1}, true);
  w2_ = he_tensor({config_.hidden1, config_.hidden2}, config_.hidden1, rng);
  b2_ = Tensor::zeros({config_.hidden2}, true);
  w3_ = he_tensor({config_.hidden2, 1}, config_.hidden2, rng);
  b3_ = Tensor::zeros({1}, true);
}

Tensor DecisionHead::forward(const Tensor& map) const {
  const auto& shape = map.shape();
  if (shape.size() != 3 || shape[2] != 1 || shape[0] != config_.input_h ||
      shape[1] != config_.input_w) {
    throw DimensionError("decision: map shape does not match the configured input");
  }
  Tensor x = reshape(avgpool2d(map, config_.input_downsample), {config_.flat_size()});
  x = activation(dense(x, w1_, b1_), Act::Relu);
  x = activation(dense(x, w2_, b2_), Act::Relu);
  return activation(dense(x, w3_, b3_), Act::Sigmoid);
}

BrakeDecision DecisionHead::decide(const Tensor& map) const {
  BrakeDecision decision;
  decision.probability = forward(map).scalar_value();
  decision.brake = decision.probability > config_.threshold;
  return decision;
}

std::vector<std::pair<std::string, Tensor>> DecisionHead::named_parameters() const {
  return {{"decision.l1.weights", w1_}, {"decision.l1.bias", b1_},
          {"decision.l2.weights", w2_}, {"decision.l2.bias", b2_},
          {"decision.l3.weights", w3_}, {"decision.l3.bias", b3_}};
}

void DecisionHead::save(const std::string& path) const {
  nlohmann::json meta;
  meta["input_h"] = config_.input_h;
  meta["input_w"] = config_.input_w;
  meta["input_downsample"] = config_.input_downsample;
  meta["hidden1"] = config_.hidden1;
  meta["hidden2"] = config_.hidden2;
  meta["threshold"] = config_.threshold;
  meta["seed"] = seed_;
  save_checkpoint(path, meta.dump(), named_parameters());
}

DecisionHead DecisionHead::load(const std::string& path) {
  const Checkpoint checkpoint = load_checkpoint(path);
  try {
    const nlohmann::json meta = nlohmann::json::parse(checkpoint.meta_json);
    DecisionConfig config;
    config.input_h = meta.at("input_h").get<int>();
    config.input_w = meta.at("input_w").get<int>();
    config.input_downsample = meta.at("input_downsample").get<int>();
    config.hidden1 = meta.at("hidden1").get<int>();
    config.hidden2 = meta.at("hidden2").get<int>();
    config.threshold = meta.at("threshold").get<double>();

    DecisionHead head(config, meta.at("seed").get<std::uint64_t>());
    apply_checkpoint(checkpoint, head.named_parameters());
    return head;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed decision checkpoint meta (" + path + "): " + e.what());
  }
}

DecisionTrainLog train_decision(DecisionHead& head,
                                const std::vector<std::pair<Tensor, int>>& dataset, int epochs,
                                double lr, std::uint64_t seed) {
  if (dataset.empty()) throw ArgumentError("train_decision: dataset is empty");
  if (epochs < 1) throw ArgumentError("train_decision: epochs must be >= 1");
  if (!(lr > 0.0)) throw ArgumentError("train_decision: learning rate must be positive");

  bool has_positive = false;
  bool has_negative = false;
  for (const auto& [map, label] : dataset) {
    (void)map;
    if (label != 0 && label != 1) throw ArgumentError("train_decision: labels must be 0 or 1");
    (label == 1 ? has_positive : has_negative) = true;
  }
  if (!has_positive || !has_negative) {
    throw ArgumentError("train_decision: both classes must be present");
  }

  std::vector<Tensor> params;
  for (auto& [name, tensor] : head.named_parameters()) {
    (void)name;
    params.push_back(tensor);
  }

  Rng rng(seed);
  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  DecisionTrainLog log;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (const int i : order) {
      const auto& [map, label] = dataset[static_cast<std::size_t>(i)];
      const Tensor loss = bce_loss({static_cast<double>(label)}, head.forward(map));
      total += loss.scalar_value();
      for (Tensor& p : params) p.zero_grad();
      loss.backward();
      for (Tensor& p : params) p.sgd_step(lr);
    }
    log.epoch_loss.push_back(total / static_cast<double>(dataset.size()));
  }
  return log;
}

}  // namespace drivesal
