#pragma once

#include <optional>
#include <string>
#include <vector>

namespace drivesal {

struct ManifestEntry {
  std::string sequence_id;
  std::vector<std::string> frame_paths;  // ordered, nonempty
  std::string saliency_map_path;
  std::string fixation_map_path;        // empty when the split has no fixations
  std::optional<int> brake_label;       // 0 or 1 when present
  double frame_timestamp = 0.0;         // seconds, time of the labeled frame

  bool has_fixation() const { return !fixation_map_path.empty(); }
  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::string base_dir;  // directory of the manifest file, set on load

  bool operator==(const DatasetManifest& other) const { return entries == other.entries; }
};

// Relative paths resolve against the manifest's directory.
std::string resolve_path(const std::string& base_dir, const std::string& path);

// JSON-lines, one entry per line. check_files verifies that every referenced
// file exists, per the manifest contract; disable for pure format work.
DatasetManifest load_manifest(const std::string& path, bool check_files = true);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

}  // namespace drivesal
