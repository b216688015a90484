#include "drivesal/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "drivesal/errors.hpp"
#include "json.hpp"

namespace drivesal {

namespace {

using nlohmann::json;

void write_f64_le(std::ostream& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>(bits >> (8 * i));
  out.write(bytes, 8);
}

double read_f64_le(std::istream& in, const std::string& path) {
  char bytes[8];
  in.read(bytes, 8);
  if (in.gcount() != 8) throw DataError("truncated checkpoint blob in " + path);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  }
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& meta_json,
                     const std::vector<std::pair<std::string, Tensor>>& tensors) {
  json meta;
  try {
    meta = json::parse(meta_json);
  } catch (const json::parse_error& e) {
    throw ArgumentError(std::string("checkpoint meta is not valid JSON: ") + e.what());
  }

  json header;
  header["format"] = "drivesal-checkpoint";
  header["version"] = 1;
  header["meta"] = meta;
  json table = json::array();
  for (const auto& [name, tensor] : tensors) {
    json row;
    row["name"] = name;
    row["shape"] = tensor.shape();
    table.push_back(row);
  }
  header["tensors"] = table;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << header.dump() << "\n";
  for (const auto& [name, tensor] : tensors) {
    (void)name;
    for (const double v : tensor.data()) write_f64_le(out, v);
  }
  if (!out) throw DataError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) throw DataError("checkpoint has no header line: " + path);
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::parse_error& e) {
    throw DataError("checkpoint header is not valid JSON (" + path + "): " + e.what());
  }
  if (header.value("format", "") != "drivesal-checkpoint") {
    throw DataError("not a drivesal checkpoint: " + path);
  }
  if (header.value("version", 0) != 1) throw DataError("unsupported checkpoint version: " + path);

  Checkpoint checkpoint;
  checkpoint.meta_json = header.at("meta").dump();
  try {
    for (const json& row : header.at("tensors")) {
      TensorBlob blob;
      blob.name = row.at("name").get<std::string>();
      blob.shape = row.at("shape").get<std::vector<int>>();
      std::size_t numel = 1;
      for (const int d : blob.shape) {
        if (d < 1) throw DataError("checkpoint tensor has a non-positive extent: " + path);
        numel *= static_cast<std::size_t>(d);
      }
      blob.values.resize(numel);
      checkpoint.tensors.push_back(std::move(blob));
    }
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint tensor table (" + path + "): " + e.what());
  }

  for (TensorBlob& blob : checkpoint.tensors) {
    for (double& v : blob.values) v = read_f64_le(in, path);
  }
  char extra = 0;
  if (in.read(&extra, 1).gcount() != 0) {
    throw DataError("trailing bytes after checkpoint blob in " + path);
  }
  return checkpoint;
}

void apply_checkpoint(const Checkpoint& checkpoint,
                      const std::vector<std::pair<std::string, Tensor>>& tensors) {
  std::map<std::string, const TensorBlob*> by_name;
  for (const TensorBlob& blob : checkpoint.tensors) {
    if (!by_name.emplace(blob.name, &blob).second) {
      throw DataError("checkpoint repeats tensor name '" + blob.name + "'");
    }
  }
  if (by_name.size() != tensors.size()) {
    throw DataError("checkpoint holds " + std::to_string(by_name.size()) + " tensors, expected " +
                    std::to_string(tensors.size()));
  }
  for (const auto& [name, tensor] : tensors) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("checkpoint is missing tensor '" + name + "'");
    if (it->second->shape != tensor.shape()) {
      throw DataError("checkpoint tensor '" + name + "' has a mismatched shape");
    }
    tensor.set_data(it->second->values);
  }
}

}  // namespace drivesal
