#include "drivesal/manifest.hpp"

#include <filesystem>
#include <fstream>

#include "drivesal/errors.hpp"
#include "json.hpp"

namespace drivesal {

namespace {

using nlohmann::json;

std::string line_error(int line_no, const std::string& what) {
  return "manifest line " + std::to_string(line_no) + ": " + what;
}

ManifestEntry parse_entry(const json& j, int line_no) {
  if (!j.is_object()) throw DataError(line_error(line_no, "expected a JSON object"));
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "sequence_id" && key != "frame_paths" && key != "saliency_map_path" &&
        key != "fixation_map_path" && key != "brake_label" && key != "frame_timestamp") {
      throw DataError(line_error(line_no, "unknown field '" + key + "'"));
    }
  }

  ManifestEntry entry;
  try {
    entry.sequence_id = j.at("sequence_id").get<std::string>();
    entry.saliency_map_path = j.at("saliency_map_path").get<std::string>();
    entry.frame_timestamp = j.at("frame_timestamp").get<double>();
    for (const auto& p : j.at("frame_paths")) entry.frame_paths.push_back(p.get<std::string>());
    if (j.contains("fixation_map_path")) {
      entry.fixation_map_path = j.at("fixation_map_path").get<std::string>();
    }
    if (j.contains("brake_label")) {
      const int label = j.at("brake_label").get<int>();
      if (label != 0 && label != 1) throw DataError(line_error(line_no, "brake_label must be 0 or 1"));
      entry.brake_label = label;
    }
  } catch (const json::exception& e) {
    throw DataError(line_error(line_no, e.what()));
  }
  if (entry.frame_paths.empty()) throw DataError(line_error(line_no, "frame_paths is empty"));
  return entry;
}

void check_entry_files(const DatasetManifest& manifest, const ManifestEntry& entry, int line_no) {
  std::vector<std::string> paths = entry.frame_paths;
  paths.push_back(entry.saliency_map_path);
  if (entry.has_fixation()) paths.push_back(entry.fixation_map_path);
  for (const std::string& p : paths) {
    const std::string resolved = resolve_path(manifest.base_dir, p);
    if (!std::filesystem::exists(resolved)) {
      throw DataError(line_error(line_no, "referenced file does not exist: " + resolved));
    }
  }
}

}  // namespace

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.lexically_normal().string();
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

DatasetManifest load_manifest(const std::string& path, bool check_files) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest: " + path);

  DatasetManifest manifest;
  manifest.base_dir = std::filesystem::path(path).parent_path().string();

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(line_error(line_no, e.what()));
    }
    ManifestEntry entry = parse_entry(j, line_no);
    if (check_files) check_entry_files(manifest, entry, line_no);
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest: " + path);
  for (const ManifestEntry& entry : manifest.entries) {
    json j;
    j["sequence_id"] = entry.sequence_id;
    j["frame_paths"] = entry.frame_paths;
    j["saliency_map_path"] = entry.saliency_map_path;
    if (entry.has_fixation()) j["fixation_map_path"] = entry.fixation_map_path;
    if (entry.brake_label.has_value()) j["brake_label"] = *entry.brake_label;
    j["frame_timestamp"] = entry.frame_timestamp;
    out << j.dump() << "\n";
  }
  if (!out) throw DataError("failed writing manifest: " + path);
}

}  // namespace drivesal
