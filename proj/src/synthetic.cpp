#include "drivesal/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <vector>

#include "drivesal/errors.hpp"
#include "drivesal/image_io.hpp"
#include "drivesal/manifest.hpp"
#include "drivesal/rng.hpp"
#include "drivesal/tensor.hpp"

namespace drivesal {

namespace {

std::string seq_name(int index) {
  std::ostringstream out;
  out << "seq_" << std::setw(4) << std::setfill('0') << index;
  return out.str();
}

std::vector<double> blob_kernel(int height, int width, double cx, double cy, double sigma) {
  std::vector<double> values(static_cast<std::size_t>(height) * width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const double dx = j - cx;
      const double dy = i - cy;
      values[static_cast<std::size_t>(i) * width + j] =
          std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  }
  return values;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_sequences < 1) throw ConfigError("synth: num_sequences must be at least 1");
  if (seq_len < 1) throw ConfigError("synth: seq_len must be at least 1");
  if (height < 8 || width < 8) throw ConfigError("synth: image extents must be at least 8");
  if (!(train_frac >= 0.0 && val_frac >= 0.0 && train_frac + val_frac <= 1.0)) {
    throw ConfigError("synth: split fractions must be nonnegative and sum to at most 1");
  }
  if (!(small_radius_lo > 0.0 && small_radius_lo <= small_radius_hi)) {
    throw ConfigError("synth: small radius range is invalid");
  }
  if (!(small_radius_hi < large_radius_lo && large_radius_lo <= large_radius_hi)) {
    throw ConfigError("synth: large radius range must lie above the small range");
  }
  if (!(label_radius > small_radius_hi && label_radius < large_radius_lo)) {
    throw ConfigError("synth: label_radius must separate the small and large modes");
  }
  const double margin = large_radius_hi + 2.0;
  if (width - 1.0 - margin <= margin || height - 1.0 - margin <= margin) {
    throw ConfigError("synth: image extents too small for the largest blob");
  }
  if (!(noise_level >= 0.0 && noise_level < 1.0)) {
    throw ConfigError("synth: noise_level must be in [0,1)");
  }
  if (!(fixation_level > 0.0 && fixation_level < 1.0)) {
    throw ConfigError("synth: fixation_level must be in (0,1)");
  }
}

SynthPaths gen_synthetic(const SynthConfig& config, const std::string& out_dir,
                         std::uint64_t seed) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory: " + out_dir);

  int n_train = static_cast<int>(std::lround(config.num_sequences * config.train_frac));
  int n_val = static_cast<int>(std::lround(config.num_sequences * config.val_frac));
  if (n_train + n_val > config.num_sequences) n_val = config.num_sequences - n_train;

  Rng rng(seed);
  DatasetManifest train, val, test;
  const double margin = config.large_radius_hi + 2.0;
  const int pixels = config.height * config.width;

  for (int s = 0; s < config.num_sequences; ++s) {
    const std::string name = seq_name(s);
    const std::filesystem::path seq_dir = std::filesystem::path(out_dir) / name;
    std::filesystem::create_directories(seq_dir, ec);
    if (ec) throw DataError("cannot create sequence directory: " + seq_dir.string());

    const bool large = rng.uniform() < 0.5;
    const double radius = large ? rng.uniform(config.large_radius_lo, config.large_radius_hi)
                                : rng.uniform(config.small_radius_lo, config.small_radius_hi);
    const double sigma = radius / 2.0;
    const double x0 = rng.uniform(margin, config.width - 1.0 - margin);
    const double y0 = rng.uniform(margin, config.height - 1.0 - margin);
    const double x1 = rng.uniform(margin, config.width - 1.0 - margin);
    const double y1 = rng.uniform(margin, config.height - 1.0 - margin);

    ManifestEntry entry;
    entry.sequence_id = name;
    std::vector<double> kernel;
    for (int t = 0; t < config.seq_len; ++t) {
      const double f = config.seq_len == 1 ? 0.0 : t / (config.seq_len - 1.0);
      kernel = blob_kernel(config.height, config.width, x0 + f * (x1 - x0), y0 + f * (y1 - y0),
                           sigma);
      std::vector<double> frame(static_cast<std::size_t>(pixels) * 3);
      for (int p = 0; p < pixels; ++p) {
        for (int c = 0; c < 3; ++c) {
          const double v = config.noise_level * rng.uniform() + kernel[p];
          frame[static_cast<std::size_t>(p) * 3 + c] = std::min(1.0, v);
        }
      }
      const std::string frame_name = "frame_" + std::to_string(t) + ".ppm";
      write_rgb_image(Tensor::from_data({config.height, config.width, 3}, frame),
                      (seq_dir / frame_name).string());
      entry.frame_paths.push_back(name + "/" + frame_name);
    }

    // Ground truth keys off the last frame: its blob is the saliency target
    // and its radius decides the brake label.
    write_gray_map(Tensor::from_data({config.height, config.width, 1}, kernel),
                   (seq_dir / "saliency.pgm").string());
    double peak = 0.0;
    for (const double v : kernel) peak = std::max(peak, v);
    std::vector<double> fixation(kernel.size());
    for (std::size_t p = 0; p < kernel.size(); ++p) {
      fixation[p] = kernel[p] > config.fixation_level * peak ? 1.0 : 0.0;
    }
    write_gray_map(Tensor::from_data({config.height, config.width, 1}, fixation),
                   (seq_dir / "fixation.pgm").string());

    entry.saliency_map_path = name + "/saliency.pgm";
    entry.fixation_map_path = name + "/fixation.pgm";
    entry.brake_label = radius > config.label_radius ? 1 : 0;
    entry.frame_timestamp = 100.0 * s + (config.seq_len - 1) / 3.0;

    DatasetManifest& split = s < n_train ? train : (s < n_train + n_val ? val : test);
    split.entries.push_back(std::move(entry));
  }

  SynthPaths paths;
  paths.train_manifest = (std::filesystem::path(out_dir) / "train.jsonl").string();
  paths.val_manifest = (std::filesystem::path(out_dir) / "val.jsonl").string();
  paths.test_manifest = (std::filesystem::path(out_dir) / "test.jsonl").string();
  save_manifest(train, paths.train_manifest);
  save_manifest(val, paths.val_manifest);
  save_manifest(test, paths.test_manifest);
  return paths;
}

}  // namespace drivesal
