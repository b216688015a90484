#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "drivesal/errors.hpp"
#include "drivesal/gradcheck.hpp"
#include "drivesal/image_io.hpp"
#include "drivesal/mapnorm.hpp"
#include "drivesal/rng.hpp"
#include "drivesal/tensor.hpp"
#include "temp_dir.hpp"

using namespace drivesal;
using testutil::TempDir;

namespace {

void write_bytes(const std::string& path, const std::string& header,
                 const std::vector<std::uint8_t>& payload) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << header;
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
}

}  // namespace

TEST_CASE("gray map round-trip is lossless on the 1/255 grid") {
  TempDir dir("pgm_roundtrip");
  Rng rng(11);
  std::vector<double> values(5 * 7);
  for (double& v : values) v = rng.uniform_int(0, 255) / 255.0;
  const Tensor map = Tensor::from_data({5, 7, 1}, values);

  write_gray_map(map, dir.str("map.pgm"));
  const Tensor back = load_gray_map(dir.str("map.pgm"));

  REQUIRE(back.shape() == std::vector<int>{5, 7, 1});
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(back.data()[i] == values[i]);
}

TEST_CASE("gray map loader scales bytes by 255") {
  TempDir dir("pgm_scale");
  write_bytes(dir.str("a.pgm"), "P5\n2 2\n255\n", {255, 255, 255, 255});
  const Tensor all_one = load_gray_map(dir.str("a.pgm"));
  for (const double v : all_one.data()) CHECK(v == 1.0);

  write_bytes(dir.str("b.pgm"), "P5\n2 1\n255\n", {128, 0});
  const Tensor b = load_gray_map(dir.str("b.pgm"));
  CHECK(b.data()[0] == 128.0 / 255.0);
  CHECK(b.data()[1] == 0.0);
}

TEST_CASE("gray map loader handles header comments and whitespace") {
  TempDir dir("pgm_comments");
  write_bytes(dir.str("c.pgm"), "P5\n# a comment\n 2\t2 # trailing\n255\n", {1, 2, 3, 4});
  const Tensor t = load_gray_map(dir.str("c.pgm"));
  REQUIRE(t.shape() == std::vector<int>{2, 2, 1});
  CHECK(t.data()[3] == 4.0 / 255.0);
}

TEST_CASE("fixation loader binarizes any positive byte") {
  TempDir dir("fixation");
  write_bytes(dir.str("f.pgm"), "P5\n4 1\n255\n", {0, 1, 200, 0});
  const Tensor fix = load_fixation_map(dir.str("f.pgm"));
  CHECK(fix.data() == std::vector<double>{0.0, 1.0, 1.0, 0.0});
}

TEST_CASE("gray map writer clamps and rounds") {
  TempDir dir("pgm_clamp");
  const Tensor map = Tensor::from_data({1, 3, 1}, {-0.5, 1.5, 0.5});
  write_gray_map(map, dir.str("m.pgm"));
  const Tensor back = load_gray_map(dir.str("m.pgm"));
  CHECK(back.data()[0] == 0.0);
  CHECK(back.data()[1] == 1.0);
  CHECK(back.data()[2] == 128.0 / 255.0);
}

TEST_CASE("image loaders reject malformed files") {
  TempDir dir("pgm_bad");

  write_bytes(dir.str("maxval.pgm"), "P5\n2 2\n65535\n", {0, 0, 0, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(load_gray_map(dir.str("maxval.pgm")), DataError);

  write_bytes(dir.str("rgb.ppm"), "P6\n1 1\n255\n", {1, 2, 3});
  CHECK_THROWS_WITH_AS(load_gray_map(dir.str("rgb.ppm")), doctest::Contains("multi-channel"),
                       DataError);
  CHECK_THROWS_AS(load_rgb_image(dir.str("maxval.pgm")), DataError);

  write_bytes(dir.str("short.pgm"), "P5\n2 2\n255\n", {9, 9});
  CHECK_THROWS_WITH_AS(load_gray_map(dir.str("short.pgm")), doctest::Contains("truncated"),
                       DataError);

  write_bytes(dir.str("magic.pgm"), "Q5\n2 2\n255\n", {0, 0, 0, 0});
  CHECK_THROWS_AS(load_gray_map(dir.str("magic.pgm")), DataError);

  write_bytes(dir.str("header.pgm"), "P5\nx 2\n255\n", {0, 0, 0, 0});
  CHECK_THROWS_AS(load_gray_map(dir.str("header.pgm")), DataError);

  CHECK_THROWS_AS(load_gray_map(dir.str("missing.pgm")), DataError);
}

TEST_CASE("gray map writer validates shape") {
  TempDir dir("pgm_shape");
  CHECK_THROWS_AS(write_gray_map(Tensor::from_data({2, 2}, {1, 2, 3, 4}), dir.str("x.pgm")),
                  DimensionError);
  CHECK_THROWS_AS(write_gray_map(Tensor::zeros({2, 2, 3}), dir.str("x.pgm")), DimensionError);
}

TEST_CASE("rgb image round-trip is lossless on the 1/255 grid") {
  TempDir dir("ppm_roundtrip");
  Rng rng(12);
  std::vector<double> values(3 * 4 * 3);
  for (double& v : values) v = rng.uniform_int(0, 255) / 255.0;
  const Tensor image = Tensor::from_data({3, 4, 3}, values);

  write_rgb_image(image, dir.str("img.ppm"));
  const Tensor back = load_rgb_image(dir.str("img.ppm"));

  REQUIRE(back.shape() == std::vector<int>{3, 4, 3});
  CHECK(back.data() == values);
}

TEST_CASE("normalize_map sum_to_one") {
  const Tensor uniform = normalize_map(Tensor::from_data({4}, {1, 1, 1, 1}), NormMode::SumToOne);
  for (const double v : uniform.data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));

  const Tensor map = normalize_map(Tensor::from_data({2, 2, 1}, {0.3, 1.9, 0.4, 2.2}),
                                   NormMode::SumToOne);
  double total = 0.0;
  for (const double v : map.data()) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(normalize_map(Tensor::zeros({2, 2, 1}), NormMode::SumToOne),
                  DegenerateInputError);
}

TEST_CASE("normalize_map standardize") {
  const Tensor z = normalize_map(Tensor::from_data({2}, {0.0, 2.0}), NormMode::Standardize);
  CHECK(z.data()[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(z.data()[1] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(normalize_map(Tensor::full({3}, 0.7), NormMode::Standardize),
                  DegenerateInputError);
}

TEST_CASE("normalize_map max_to_one") {
  const Tensor m = normalize_map(Tensor::from_data({2}, {0.2, 0.5}), NormMode::MaxToOne);
  CHECK(m.data()[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(m.data()[1] == 1.0);

  CHECK_THROWS_AS(normalize_map(Tensor::from_data({2}, {-1.0, 0.0}), NormMode::MaxToOne),
                  DegenerateInputError);
}

TEST_CASE("normalize_map is differentiable") {
  const Tensor x = Tensor::from_data({4}, {0.8, 0.3, 1.1, 0.5}, true);
  const Tensor w = Tensor::from_data({4}, {1.0, -2.0, 0.5, 1.5});

  const double sum_err = grad_check(
      [&] { return sum(mul(normalize_map(x, NormMode::SumToOne), w)); }, {x}, 1e-5);
  CHECK(sum_err <= 1e-4);

  const double std_err = grad_check(
      [&] { return sum(mul(normalize_map(x, NormMode::Standardize), w)); }, {x}, 1e-5);
  CHECK(std_err <= 1e-4);
}
