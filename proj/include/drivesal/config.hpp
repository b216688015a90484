#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "drivesal/backbone.hpp"
#include "drivesal/decision.hpp"
#include "drivesal/losses.hpp"

namespace drivesal {

// Flat run configuration shared by every CLI command. Serialized as
// `key = value` lines; parse -> serialize -> parse is the identity.
struct RunConfig {
  std::string variant = "G16";  // NCB, G16, G32, RBF16, RBF32
  bool loss_cc = true;
  bool loss_kl = true;
  bool loss_nss = false;
  double epsilon = 1e-7;

  int input_h = 48;
  int input_w = 64;
  std::array<int, 5> channels{8, 16, 32, 32, 32};
  int feature_channels = 32;
  int dilation = 2;
  int attn_channels = 16;
  int seq_len = 4;

  double lr = 0.01;
  int epochs = 1;
  std::uint64_t seed = 1;

  int decision_downsample = 8;
  int decision_hidden1 = 128;
  int decision_hidden2 = 64;
  double decision_threshold = 0.5;
  double decision_lr = 0.01;
  int decision_epochs = 5;

  std::string manifest;
  std::string checkpoint;
  std::string out;
  std::string decision_checkpoint;

  bool operator==(const RunConfig&) const = default;

  void validate() const;  // ConfigError on violation
  BackboneConfig backbone_config() const;
  LossConfig loss_config() const;
  DecisionConfig decision_config() const;
  std::string model_id() const;  // e.g. "CC-KL-NSS-G16", Table 1/2 style
};

// Throws ConfigError on unknown keys or unparseable values.
void set_config_key(RunConfig& config, const std::string& key, const std::string& value);

// Comma-separated loss names: "CC,KL" or "CC,KL,NSS". Case-insensitive.
void set_losses(RunConfig& config, const std::string& losses);

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

}  // namespace drivesal
