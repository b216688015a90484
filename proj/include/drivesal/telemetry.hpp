#pragma once

#include <istream>
#include <string>
#include <vector>

namespace drivesal {

struct TelemetrySample {
  double timestamp_ms = 0.0;
  double speed_mps = 0.0;
};

struct TelemetrySeries {
  std::vector<TelemetrySample> samples;
};

struct BrakeLabelConfig {
  double delta_v = 0.5;           // speed drop in m/s that counts as braking
  double interval = 1.0;          // seconds between the compared speeds
  double match_tolerance = 0.05;  // seconds allowed between a frame time and a sample

  void validate() const;
};

struct BrakeLabel {
  double frame_time = 0.0;  // seconds
  bool brake = false;
};

struct SkippedFrame {
  double frame_time = 0.0;
  std::string reason;
};

struct BrakeLabelResult {
  std::vector<BrakeLabel> labels;
  std::vector<SkippedFrame> skipped;
};

// Reads `timestamp_ms,speed_mps` CSV. Rejects non-monotone timestamps,
// negative speeds and malformed rows, naming the offending line.
TelemetrySeries parse_telemetry(std::istream& in);
TelemetrySeries load_telemetry(const std::string& path);

// Speed at time t (seconds). The nearest sample within the tolerance wins;
// when two samples bracket t and both sit within the tolerance, the speed is
// linearly interpolated between them. No sample in range -> DataError.
double speed_at(const TelemetrySeries& series, double t_seconds, double tolerance_seconds);

// label(t) = speed(t - interval) - speed(t) > delta_v, strictly. Frames whose
// lookups fail are dropped from the labels and recorded in the skip list.
BrakeLabelResult label_brakes(const TelemetrySeries& series, const std::vector<double>& frame_times,
                              const BrakeLabelConfig& config);

}  // namespace drivesal
