#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "drivesal/errors.hpp"
#include "drivesal/manifest.hpp"
#include "temp_dir.hpp"

using namespace drivesal;
using testutil::TempDir;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

DatasetManifest sample_manifest() {
  DatasetManifest m;
  ManifestEntry a;
  a.sequence_id = "seq_0000";
  a.frame_paths = {"seq_0000/frame_0.ppm", "seq_0000/frame_1.ppm"};
  a.saliency_map_path = "seq_0000/saliency.pgm";
  a.fixation_map_path = "seq_0000/fixation.pgm";
  a.brake_label = 1;
  a.frame_timestamp = 1.0 / 3.0;
  ManifestEntry b;
  b.sequence_id = "seq_0001";
  b.frame_paths = {"seq_0001/frame_0.ppm"};
  b.saliency_map_path = "seq_0001/saliency.pgm";
  b.frame_timestamp = 100.25;
  m.entries = {a, b};
  return m;
}

}  // namespace

TEST_CASE("manifest round-trip reproduces an equal manifest") {
  TempDir dir("manifest_roundtrip");
  const DatasetManifest original = sample_manifest();
  save_manifest(original, dir.str("m.jsonl"));
  const DatasetManifest loaded = load_manifest(dir.str("m.jsonl"), false);

  CHECK(loaded == original);
  REQUIRE(loaded.entries.size() == 2);
  CHECK(loaded.entries[0].frame_timestamp == 1.0 / 3.0);
  CHECK(loaded.entries[0].brake_label.has_value());
  CHECK(*loaded.entries[0].brake_label == 1);
  CHECK_FALSE(loaded.entries[1].brake_label.has_value());
  CHECK_FALSE(loaded.entries[1].has_fixation());
  CHECK(loaded.base_dir == dir.path().string());
}

TEST_CASE("manifest save is deterministic") {
  TempDir dir("manifest_determinism");
  save_manifest(sample_manifest(), dir.str("a.jsonl"));
  save_manifest(sample_manifest(), dir.str("b.jsonl"));
  CHECK(read_text(dir.str("a.jsonl")) == read_text(dir.str("b.jsonl")));
}

TEST_CASE("manifest loader skips blank lines") {
  TempDir dir("manifest_blank");
  save_manifest(sample_manifest(), dir.str("m.jsonl"));
  write_text(dir.str("padded.jsonl"), "\n" + read_text(dir.str("m.jsonl")) + "\n\n");
  CHECK(load_manifest(dir.str("padded.jsonl"), false) == sample_manifest());
}

TEST_CASE("manifest loader rejects malformed lines with line numbers") {
  TempDir dir("manifest_bad");
  const std::string valid =
      R"({"sequence_id":"s","frame_paths":["f.ppm"],"saliency_map_path":"m.pgm","frame_timestamp":0.0})";

  write_text(dir.str("json.jsonl"), valid + "\n{not json}\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir.str("json.jsonl"), false), doctest::Contains("line 2"),
                       DataError);

  write_text(dir.str("array.jsonl"), "[1,2]\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir.str("array.jsonl"), false),
                       doctest::Contains("JSON object"), DataError);

  write_text(dir.str("unknown.jsonl"),
             R"({"sequence_id":"s","frame_paths":["f"],"saliency_map_path":"m","frame_timestamp":0,"extra":1})"
             "\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir.str("unknown.jsonl"), false),
                       doctest::Contains("unknown field 'extra'"), DataError);

  write_text(dir.str("missing.jsonl"), R"({"sequence_id":"s","frame_paths":["f"]})" "\n");
  CHECK_THROWS_AS(load_manifest(dir.str("missing.jsonl"), false), DataError);

  write_text(dir.str("empty_frames.jsonl"),
             R"({"sequence_id":"s","frame_paths":[],"saliency_map_path":"m","frame_timestamp":0})"
             "\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir.str("empty_frames.jsonl"), false),
                       doctest::Contains("frame_paths"), DataError);

  write_text(dir.str("label.jsonl"),
             R"({"sequence_id":"s","frame_paths":["f"],"saliency_map_path":"m","frame_timestamp":0,"brake_label":2})"
             "\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir.str("label.jsonl"), false),
                       doctest::Contains("brake_label"), DataError);

  write_text(dir.str("type.jsonl"),
             R"({"sequence_id":7,"frame_paths":["f"],"saliency_map_path":"m","frame_timestamp":0})"
             "\n");
  CHECK_THROWS_AS(load_manifest(dir.str("type.jsonl"), false), DataError);

  CHECK_THROWS_AS(load_manifest(dir.str("nonexistent.jsonl"), false), DataError);
}

TEST_CASE("manifest loader verifies referenced files when asked") {
  TempDir dir("manifest_files");
  DatasetManifest m;
  ManifestEntry e;
  e.sequence_id = "s";
  e.frame_paths = {"frame.ppm"};
  e.saliency_map_path = "map.pgm";
  e.frame_timestamp = 0.0;
  m.entries = {e};
  save_manifest(m, dir.str("m.jsonl"));

  CHECK_THROWS_WITH_AS(load_manifest(dir.str("m.jsonl"), true), doctest::Contains("frame.ppm"),
                       DataError);

  write_text(dir.str("frame.ppm"), "x");
  write_text(dir.str("map.pgm"), "x");
  CHECK(load_manifest(dir.str("m.jsonl"), true) == m);
}

TEST_CASE("resolve_path joins relative paths against the base directory") {
  CHECK(resolve_path("/data/set", "seq/frame.ppm") == "/data/set/seq/frame.ppm");
  CHECK(resolve_path("/data/set", "/abs/frame.ppm") == "/abs/frame.ppm");
  CHECK(resolve_path("", "frame.ppm") == "frame.ppm");
  CHECK(resolve_path("/data/set", "./a/../frame.ppm") == "/data/set/frame.ppm");
}
