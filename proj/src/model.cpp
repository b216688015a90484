#include "drivesal/model.hpp"

#include "drivesal/checkpoint.hpp"
#include "drivesal/errors.hpp"
#include "json.hpp"

namespace drivesal {

void ModelConfig::validate() const {
  backbone.validate();
  if (attn_channels < 1) throw ConfigError("model: attn_channels must be at least 1");
  if (seq_len < 1) throw ConfigError("model: seq_len must be at least 1");
}

ModelConfig ModelConfig::from_run(const RunConfig& run) {
  ModelConfig config;
  config.backbone = run.backbone_config();
  config.attn_channels = run.attn_channels;
  config.seq_len = run.seq_len;
  config.variant = parse_variant(run.variant);
  return config;
}

SaliencyModel::SaliencyModel(const ModelConfig& config, std::uint64_t seed)
    : config_((config.validate(), config)),
      seed_(seed),
      backbone_(config.backbone, seed),
      dam_(config.backbone.feature_channels, config.attn_channels, seed + 1),
      priors_(config.variant, seed + 2),
      readout_(config.backbone.feature_channels, config.variant.count, 8, seed + 3) {}

Tensor SaliencyModel::predict(const std::vector<Tensor>& frames) const {
  if (frames.empty()) throw ArgumentError("predict: no frames given");
  if (frames.size() != 1 && static_cast<int>(frames.size()) != config_.seq_len) {
    throw ArgumentError("predict: expected 1 frame (static mode) or seq_len = " +
                        std::to_string(config_.seq_len) + " frames, got " +
                        std::to_string(frames.size()));
  }
  std::vector<Tensor> features;
  features.reserve(frames.size());
  for (const Tensor& frame : frames) features.push_back(backbone_.extract(frame));

  const DamOutput attended = dam_.run(features);
  const Tensor combined =
      append_priors(attended.context,
                    priors_.maps(config_.backbone.feature_h(), config_.backbone.feature_w()));
  return readout_.apply(combined);
}

std::vector<std::pair<std::string, Tensor>> SaliencyModel::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> params = backbone_.named_parameters();
  for (auto& p : dam_.named_parameters()) params.push_back(std::move(p));
  for (auto& p : priors_.named_parameters()) params.push_back(std::move(p));
  for (auto& p : readout_.named_parameters()) params.push_back(std::move(p));
  return params;
}

void SaliencyModel::save(const std::string& path) const {
  nlohmann::json meta;
  meta["input_h"] = config_.backbone.input_h;
  meta["input_w"] = config_.backbone.input_w;
  meta["channels"] = config_.backbone.block_channels;
  meta["feature_channels"] = config_.backbone.feature_channels;
  meta["dilation"] = config_.backbone.dilation_last;
  meta["attn_channels"] = config_.attn_channels;
  meta["seq_len"] = config_.seq_len;
  meta["variant"] = variant_name(config_.variant);
  meta["seed"] = seed_;
  save_checkpoint(path, meta.dump(), named_parameters());
}

SaliencyModel SaliencyModel::load(const std::string& path) {
  const Checkpoint checkpoint = load_checkpoint(path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(checkpoint.meta_json);
    ModelConfig config;
    config.backbone.input_h = meta.at("input_h").get<int>();
    config.backbone.input_w = meta.at("input_w").get<int>();
    config.backbone.block_channels = meta.at("channels").get<std::array<int, 5>>();
    config.backbone.feature_channels = meta.at("feature_channels").get<int>();
    config.backbone.dilation_last = meta.at("dilation").get<int>();
    config.attn_channels = meta.at("attn_channels").get<int>();
    config.seq_len = meta.at("seq_len").get<int>();
    config.variant = parse_variant(meta.at("variant").get<std::string>());

    SaliencyModel model(config, meta.at("seed").get<std::uint64_t>());
    apply_checkpoint(checkpoint, model.named_parameters());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model checkpoint meta (" + path + "): " + e.what());
  }
}

}  // namespace drivesal
