#include "drivesal/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "drivesal/errors.hpp"

namespace drivesal {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, int line_no, const char* what) {
  const std::string text = trim(field);
  if (text.empty()) {
    throw DataError("telemetry line " + std::to_string(line_no) + ": empty " + what + " field");
  }
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(value)) {
    throw DataError("telemetry line " + std::to_string(line_no) + ": bad " + what + " value '" +
                    text + "'");
  }
  return value;
}

}  // namespace

void BrakeLabelConfig::validate() const {
  if (!(delta_v > 0.0)) throw ConfigError("brake label delta_v must be positive");
  if (!(interval > 0.0)) throw ConfigError("brake label interval must be positive");
  if (!(match_tolerance > 0.0)) throw ConfigError("brake label match_tolerance must be positive");
}

TelemetrySeries parse_telemetry(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("telemetry: empty input, expected header row");
  if (trim(line) != "timestamp_ms,speed_mps") {
    throw DataError("telemetry line 1: expected header 'timestamp_ms,speed_mps'");
  }

  TelemetrySeries series;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw DataError("telemetry line " + std::to_string(line_no) +
                      ": expected exactly two comma-separated fields");
    }
    TelemetrySample sample;
    sample.timestamp_ms = parse_number(line.substr(0, comma), line_no, "timestamp");
    sample.speed_mps = parse_number(line.substr(comma + 1), line_no, "speed");
    if (sample.speed_mps < 0.0) {
      throw DataError("telemetry line " + std::to_string(line_no) + ": negative speed");
    }
    if (!series.samples.empty() && sample.timestamp_ms <= series.samples.back().timestamp_ms) {
      throw DataError("telemetry line " + std::to_string(line_no) +
                      ": timestamps must be strictly increasing");
    }
    series.samples.push_back(sample);
  }
  return series;
}

TelemetrySeries load_telemetry(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open telemetry file: " + path);
  return parse_telemetry(in);
}

double speed_at(const TelemetrySeries& series, double t_seconds, double tolerance_seconds) {
  if (series.samples.empty()) throw DataError("speed_at: telemetry series is empty");
  if (!(tolerance_seconds > 0.0)) throw ArgumentError("speed_at: tolerance must be positive");

  const double t_ms = t_seconds * 1000.0;
  const double tol_ms = tolerance_seconds * 1000.0;
  const auto& samples = series.samples;
  const auto it =
      std::lower_bound(samples.begin(), samples.end(), t_ms,
                       [](const TelemetrySample& s, double v) { return s.timestamp_ms < v; });

  const TelemetrySample* next = it == samples.end() ? nullptr : &*it;
  const TelemetrySample* prev = it == samples.begin() ? nullptr : &*(it - 1);
  const bool next_ok = next != nullptr && next->timestamp_ms - t_ms <= tol_ms;
  const bool prev_ok = prev != nullptr && t_ms - prev->timestamp_ms <= tol_ms;

  if (next_ok && next->timestamp_ms == t_ms) return next->speed_mps;
  if (prev_ok && next_ok) {
    const double w = (t_ms - prev->timestamp_ms) / (next->timestamp_ms - prev->timestamp_ms);
    return prev->speed_mps + w * (next->speed_mps - prev->speed_mps);
  }
  if (prev_ok) return prev->speed_mps;
  if (next_ok) return next->speed_mps;
  throw DataError("speed_at: no telemetry sample within tolerance of t=" +
                  std::to_string(t_seconds) + "s");
}

BrakeLabelResult label_brakes(const TelemetrySeries& series, const std::vector<double>& frame_times,
                              const BrakeLabelConfig& config) {
  config.validate();
  BrakeLabelResult result;
  for (const double t : frame_times) {
    double v_now = 0.0;
    try {
      v_now = speed_at(series, t, config.match_tolerance);
    } catch (const DataError&) {
      result.skipped.push_back({t, "no telemetry within tolerance of frame time"});
      continue;
    }
    double v_prev = 0.0;
    try {
      v_prev = speed_at(series, t - config.interval, config.match_tolerance);
    } catch (const DataError&) {
      result.skipped.push_back({t, "no telemetry within tolerance of frame time minus interval"});
      continue;
    }
    result.labels.push_back({t, v_prev - v_now > config.delta_v});
  }
  return result;
}

}  // namespace drivesal
