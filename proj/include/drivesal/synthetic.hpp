#pragma once

#include <cstdint>
#include <string>

namespace drivesal {

// Moving bright blob on noise; ground-truth saliency is the blob kernel in
// the last frame. Blob radius is bimodal and the brake label is true exactly
// for the large mode, so the label is a learnable visual property.
struct SynthConfig {
  int num_sequences = 60;
  int seq_len = 4;
  int height = 48;
  int width = 64;
  double train_frac = 0.6;
  double val_frac = 0.2;  // remainder is the test split
  double small_radius_lo = 3.0;
  double small_radius_hi = 4.5;
  double large_radius_lo = 6.5;
  double large_radius_hi = 8.0;
  double label_radius = 5.5;    // brake = last-frame radius above this
  double fixation_level = 0.6;  // fixation cells: saliency above this fraction of the peak
  double noise_level = 0.08;

  void validate() const;
};

struct SynthPaths {
  std::string train_manifest;
  std::string val_manifest;
  std::string test_manifest;
};

SynthPaths gen_synthetic(const SynthConfig& config, const std::string& out_dir,
                         std::uint64_t seed);

}  // namespace drivesal
