#include "drivesal/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "drivesal/errors.hpp"
#include "drivesal/priors.hpp"

namespace drivesal {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

int parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + value +
                      "'");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + value + "'");
}

std::array<int, 5> parse_channels(const std::string& key, const std::string& value) {
  std::array<int, 5> channels{};
  std::istringstream in(value);
  std::string part;
  int i = 0;
  while (std::getline(in, part, ',')) {
    if (i >= 5) throw ConfigError("config key '" + key + "': expected 5 channel counts");
    channels[static_cast<std::size_t>(i++)] = parse_int(key, trim(part));
  }
  if (i != 5) throw ConfigError("config key '" + key + "': expected 5 channel counts");
  return channels;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  parse_variant(variant);
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (seq_len < 1) throw ConfigError("seq_len must be at least 1");
  if (attn_channels < 1) throw ConfigError("attn_channels must be at least 1");
  if (!loss_cc && !loss_kl && !loss_nss) throw ConfigError("at least one loss term must be enabled");
  if (!(decision_lr > 0.0)) throw ConfigError("decision_lr must be positive");
  if (decision_epochs < 1) throw ConfigError("decision_epochs must be at least 1");
  backbone_config().validate();
  decision_config().validate();
}

BackboneConfig RunConfig::backbone_config() const {
  BackboneConfig bc;
  bc.input_h = input_h;
  bc.input_w = input_w;
  bc.block_channels = channels;
  bc.feature_channels = feature_channels;
  bc.dilation_last = dilation;
  return bc;
}

LossConfig RunConfig::loss_config() const {
  LossConfig lc;
  lc.epsilon = epsilon;
  lc.w_kl = loss_kl ? 1.0 : 0.0;
  lc.w_cc = loss_cc ? 1.0 : 0.0;
  lc.w_nss = loss_nss ? 1.0 : 0.0;
  lc.nss_enabled = loss_nss;
  return lc;
}

DecisionConfig RunConfig::decision_config() const {
  DecisionConfig dc;
  dc.input_h = input_h;
  dc.input_w = input_w;
  dc.input_downsample = decision_downsample;
  dc.hidden1 = decision_hidden1;
  dc.hidden2 = decision_hidden2;
  dc.threshold = decision_threshold;
  return dc;
}

std::string RunConfig::model_id() const {
  std::string id;
  if (loss_cc) id += "CC-";
  if (loss_kl) id += "KL-";
  if (loss_nss) id += "NSS-";
  return id + variant;
}

void set_config_key(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "variant") {
    parse_variant(value);
    config.variant = value;
  } else if (key == "loss_cc") {
    config.loss_cc = parse_bool(key, value);
  } else if (key == "loss_kl") {
    config.loss_kl = parse_bool(key, value);
  } else if (key == "loss_nss") {
    config.loss_nss = parse_bool(key, value);
  } else if (key == "epsilon") {
    config.epsilon = parse_double(key, value);
  } else if (key == "input_h") {
    config.input_h = parse_int(key, value);
  } else if (key == "input_w") {
    config.input_w = parse_int(key, value);
  } else if (key == "channels") {
    config.channels = parse_channels(key, value);
  } else if (key == "feature_channels") {
    config.feature_channels = parse_int(key, value);
  } else if (key == "dilation") {
    config.dilation = parse_int(key, value);
  } else if (key == "attn_channels") {
    config.attn_channels = parse_int(key, value);
  } else if (key == "seq_len") {
    config.seq_len = parse_int(key, value);
  } else if (key == "lr") {
    config.lr = parse_double(key, value);
  } else if (key == "epochs") {
    config.epochs = parse_int(key, value);
  } else if (key == "seed") {
    config.seed = parse_u64(key, value);
  } else if (key == "decision_downsample") {
    config.decision_downsample = parse_int(key, value);
  } else if (key == "decision_hidden1") {
    config.decision_hidden1 = parse_int(key, value);
  } else if (key == "decision_hidden2") {
    config.decision_hidden2 = parse_int(key, value);
  } else if (key == "decision_threshold") {
    config.decision_threshold = parse_double(key, value);
  } else if (key == "decision_lr") {
    config.decision_lr = parse_double(key, value);
  } else if (key == "decision_epochs") {
    config.decision_epochs = parse_int(key, value);
  } else if (key == "manifest") {
    config.manifest = value;
  } else if (key == "checkpoint") {
    config.checkpoint = value;
  } else if (key == "out") {
    config.out = value;
  } else if (key == "decision_checkpoint") {
    config.decision_checkpoint = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void set_losses(RunConfig& config, const std::string& losses) {
  bool cc = false;
  bool kl = false;
  bool nss = false;
  std::istringstream in(losses);
  std::string part;
  while (std::getline(in, part, ',')) {
    const std::string name = upper(trim(part));
    if (name == "CC") {
      cc = true;
    } else if (name == "KL") {
      kl = true;
    } else if (name == "NSS") {
      nss = true;
    } else {
      throw ConfigError("unknown loss term '" + trim(part) + "' (expected CC, KL or NSS)");
    }
  }
  if (!cc && !kl && !nss) throw ConfigError("loss list selects no terms");
  config.loss_cc = cc;
  config.loss_kl = kl;
  config.loss_nss = nss;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set_config_key(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "variant = " << c.variant << "\n";
  out << "loss_cc = " << (c.loss_cc ? "true" : "false") << "\n";
  out << "loss_kl = " << (c.loss_kl ? "true" : "false") << "\n";
  out << "loss_nss = " << (c.loss_nss ? "true" : "false") << "\n";
  out << "epsilon = " << format_double(c.epsilon) << "\n";
  out << "input_h = " << c.input_h << "\n";
  out << "input_w = " << c.input_w << "\n";
  out << "channels = " << c.channels[0] << "," << c.channels[1] << "," << c.channels[2] << ","
      << c.channels[3] << "," << c.channels[4] << "\n";
  out << "feature_channels = " << c.feature_channels << "\n";
  out << "dilation = " << c.dilation << "\n";
  out << "attn_channels = " << c.attn_channels << "\n";
  out << "seq_len = " << c.seq_len << "\n";
  out << "lr = " << format_double(c.lr) << "\n";
  out << "epochs = " << c.epochs << "\n";
  out << "seed = " << c.seed << "\n";
  out << "decision_downsample = " << c.decision_downsample << "\n";
  out << "decision_hidden1 = " << c.decision_hidden1 << "\n";
  out << "decision_hidden2 = " << c.decision_hidden2 << "\n";
  out << "decision_threshold = " << format_double(c.decision_threshold) << "\n";
  out << "decision_lr = " << format_double(c.decision_lr) << "\n";
  out << "decision_epochs = " << c.decision_epochs << "\n";
  out << "manifest = " << c.manifest << "\n";
  out << "checkpoint = " << c.checkpoint << "\n";
  out << "out = " << c.out << "\n";
  out << "decision_checkpoint = " << c.decision_checkpoint << "\n";
  return out.str();
}

}  // namespace drivesal
