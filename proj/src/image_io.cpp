#include "drivesal/image_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

#include "drivesal/errors.hpp"

namespace drivesal {

namespace {

// Reads one PNM header integer, skipping whitespace and # comments.
long read_header_int(std::istream& in, const std::string& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) throw DataError("malformed PNM header in " + path);
  long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1 << 24) throw DataError("PNM header value out of range in " + path);
    c = in.get();
  }
  if (c != EOF) in.unget();
  return value;
}

struct PnmImage {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> bytes;  // row-major, interleaved
};

PnmImage read_pnm(const std::string& path, int expected_channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image file: " + path);

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw DataError("not a binary PGM/PPM file: " + path);
  }
  PnmImage image;
  image.channels = magic[1] == '5' ? 1 : 3;
  if (image.channels != expected_channels) {
    throw DataError(expected_channels == 1
                        ? "expected single-channel PGM (P5), got multi-channel: " + path
                        : "expected three-channel PPM (P6): " + path);
  }
  image.width = static_cast<int>(read_header_int(in, path));
  image.height = static_cast<int>(read_header_int(in, path));
  const long maxval = read_header_int(in, path);
  if (image.width <= 0 || image.height <= 0) throw DataError("empty image: " + path);
  if (maxval != 255) throw DataError("only 8-bit images (maxval 255) supported: " + path);

  const int sep = in.get();
  if (sep == EOF || !std::isspace(sep)) throw DataError("malformed PNM header in " + path);

  const std::size_t count = static_cast<std::size_t>(image.width) * image.height * image.channels;
  image.bytes.resize(count);
  in.read(reinterpret_cast<char*>(image.bytes.data()), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count) {
    throw DataError("truncated pixel data in " + path);
  }
  return image;
}

void write_pnm(const std::string& path, const Tensor& image, int channels) {
  const auto& shape = image.shape();
  if (shape.size() != 3 || shape[2] != channels) {
    throw DimensionError("image writer expects [H,W," + std::to_string(channels) + "]");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write image file: " + path);
  out << (channels == 1 ? "P5" : "P6") << "\n" << shape[1] << " " << shape[0] << "\n255\n";

  const std::vector<double>& values = image.data();
  std::vector<std::uint8_t> bytes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::min(1.0, std::max(0.0, values[i]));
    bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing pixel data to " + path);
}

}  // namespace

Tensor load_gray_map(const std::string& path) {
  const PnmImage image = read_pnm(path, 1);
  std::vector<double> values(image.bytes.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = image.bytes[i] / 255.0;
  return Tensor::from_data({image.height, image.width, 1}, values);
}

Tensor load_fixation_map(const std::string& path) {
  const PnmImage image = read_pnm(path, 1);
  std::vector<double> values(image.bytes.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = image.bytes[i] > 0 ? 1.0 : 0.0;
  return Tensor::from_data({image.height, image.width, 1}, values);
}

void write_gray_map(const Tensor& map, const std::string& path) { write_pnm(path, map, 1); }

Tensor load_rgb_image(const std::string& path) {
  const PnmImage image = read_pnm(path, 3);
  std::vector<double> values(image.bytes.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = image.bytes[i] / 255.0;
  return Tensor::from_data({image.height, image.width, 3}, values);
}

void write_rgb_image(const Tensor& image, const std::string& path) { write_pnm(path, image, 3); }

}  // namespace drivesal
