#include <doctest.h>

#include "drivesal/backbone.hpp"
#include "drivesal/rng.hpp"

using namespace drivesal;

namespace {

Tensor random_image(int h, int w, Rng& rng, bool requires_grad = false) {
  std::vector<double> v(static_cast<std::size_t>(h) * w * 3);
  for (double& x : v) x = rng.uniform();
  return Tensor::from_data({h, w, 3}, std::move(v), requires_grad);
}

BackboneConfig tiny_config(int h, int w) {
  BackboneConfig cfg;
  cfg.input_h = h;
  cfg.input_w = w;
  cfg.block_channels = {2, 2, 2, 2, 2};
  cfg.feature_channels = 2;
  return cfg;
}

}  // namespace

TEST_SUITE("backbone") {
  TEST_CASE("config validation") {
    BackboneConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.input_h = 50;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = BackboneConfig{};
    cfg.dilation_last = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = BackboneConfig{};
    cfg.block_channels[2] = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = BackboneConfig{};
    cfg.feature_channels = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("desk config maps 48x64 to 6x8x32") {
    Backbone net(BackboneConfig{}, 11);
    Rng rng(1);
    Tensor y = net.extract(random_image(48, 64, rng));
    CHECK(y.shape() == std::vector<int>{6, 8, 32});
  }

  TEST_CASE("240x320 input lands on a 30x40 grid") {
    Backbone net(tiny_config(240, 320), 3);
    Rng rng(2);
    Tensor y = net.extract(random_image(240, 320, rng));
    CHECK(y.shape() == std::vector<int>{30, 40, 2});
  }

  TEST_CASE("full-scale config wires the vgg-16 channel progression") {
    BackboneConfig cfg;
    cfg.input_h = 240;
    cfg.input_w = 320;
    cfg.block_channels = {64, 128, 256, 512, 512};
    cfg.feature_channels = 512;
    Backbone net(cfg, 5);
    auto params = net.named_parameters();
    REQUIRE(params.size() == 26);  // 13 convs, kernel + bias each
    CHECK(params.front().second.shape() == std::vector<int>{3, 3, 3, 64});
    CHECK(params[2 * 12].second.shape() == std::vector<int>{3, 3, 512, 512});
    CHECK(cfg.feature_h() == 30);
    CHECK(cfg.feature_w() == 40);
  }

  TEST_CASE("output is input/8 across random valid sizes") {
    Rng rng(17);
    for (int it = 0; it < 4; ++it) {
      const int h = 8 * rng.uniform_int(1, 5);
      const int w = 8 * rng.uniform_int(1, 5);
      Backbone net(tiny_config(h, w), 23);
      Tensor y = net.extract(random_image(h, w, rng));
      CHECK(y.shape() == std::vector<int>{h / 8, w / 8, 2});
    }
  }

  TEST_CASE("identical seeds give bit-identical weights, different seeds differ") {
    Backbone a(BackboneConfig{}, 99), b(BackboneConfig{}, 99), c(BackboneConfig{}, 100);
    auto pa = a.named_parameters(), pb = b.named_parameters(), pc = c.named_parameters();
    REQUIRE(pa.size() == pb.size());
    bool any_diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      CHECK(pa[i].first == pb[i].first);
      CHECK(pa[i].second.data() == pb[i].second.data());
      if (pa[i].second.data() != pc[i].second.data()) any_diff = true;
    }
    CHECK(any_diff);
  }

  TEST_CASE("zero image gives a zero feature map") {
    Backbone net(BackboneConfig{}, 7);
    Tensor y = net.extract(Tensor::zeros({48, 64, 3}));
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y.at(i) == 0.0);
  }

  TEST_CASE("deterministic extraction") {
    Backbone net(BackboneConfig{}, 41);
    Rng rng(4);
    Tensor img = random_image(48, 64, rng);
    CHECK(net.extract(img).data() == net.extract(img).data());
  }

  TEST_CASE("input shape errors") {
    Backbone net(BackboneConfig{}, 7);
    CHECK_THROWS_AS(net.extract(Tensor::zeros({48, 64, 1})), DimensionError);
    CHECK_THROWS_AS(net.extract(Tensor::zeros({40, 64, 3})), DimensionError);
  }

  TEST_CASE("dilated receptive field is wider than any undilated one") {
    // With every conv 3x3 and the pool schedule fixed, an undilated stack's
    // receptive field spans at most 148 input pixels. The dilated block-4/5
    // path extends that to 212, so the measured gradient footprint of one
    // center output unit must exceed the undilated hard bound.
    BackboneConfig cfg = tiny_config(256, 256);
    cfg.block_channels = {4, 4, 4, 4, 4};
    cfg.feature_channels = 4;
    Backbone net(cfg, 13);
    Rng rng(29);
    Tensor img = random_image(256, 256, rng, true);
    Tensor y = net.extract(img);
    REQUIRE(y.shape() == std::vector<int>{32, 32, 4});
    Tensor probe = Tensor::zeros({32, 32, 4});
    probe.set_value((static_cast<std::size_t>(16) * 32 + 16) * 4, 1.0);
    img.zero_grad();
    sum(mul(y, probe)).backward();
    int min_r = 256, max_r = -1, min_c = 256, max_c = -1;
    const std::vector<double>& g = img.grad();
    for (int r = 0; r < 256; ++r)
      for (int c = 0; c < 256; ++c)
        for (int ch = 0; ch < 3; ++ch)
          if (g[(static_cast<std::size_t>(r) * 256 + c) * 3 + ch] != 0.0) {
            min_r = std::min(min_r, r);
            max_r = std::max(max_r, r);
            min_c = std::min(min_c, c);
            max_c = std::max(max_c, c);
          }
    CHECK(max_r - min_r + 1 > 148);
    CHECK(max_c - min_c + 1 > 148);
    CHECK(max_r - min_r + 1 <= 212);
    CHECK(max_c - min_c + 1 <= 212);
  }
}
