#include "drivesal/backbone.hpp"

#include "drivesal/init.hpp"
#include "drivesal/rng.hpp"

namespace drivesal {

namespace {
constexpr int kConvCounts[5] = {2, 2, 3, 3, 3};
}

void BackboneConfig::validate() const {
  if (input_h <= 0 || input_w <= 0 || input_h % 8 != 0 || input_w % 8 != 0)
    throw ConfigError("backbone input extents must be positive multiples of 8");
  for (int c : block_channels)
    if (c < 1) throw ConfigError("backbone block channels must be >= 1");
  if (feature_channels < 1) throw ConfigError("feature_channels must be >= 1");
  if (dilation_last < 2) throw ConfigError("dilation_last must be >= 2");
}

Backbone::Backbone(const BackboneConfig& config, std::uint64_t seed) : cfg_(config) {
  cfg_.validate();
  Rng rng(seed);
  int cin = 3;
  for (int b = 0; b < 5; ++b) {
    std::vector<Conv> block;
    for (int i = 0; i < kConvCounts[b]; ++i) {
      const bool last_in_block = (i == kConvCounts[b] - 1);
      const int cout = (b == 4 && last_in_block) ? cfg_.feature_channels
                                                 : cfg_.block_channels[static_cast<std::size_t>(b)];
      Conv layer;
      layer.kernel = he_tensor({3, 3, cin, cout}, static_cast<std::size_t>(9) * cin, rng);
      layer.bias = Tensor::zeros({cout}, true);
      layer.dilation = ((b == 3 && last_in_block) || b == 4) ? cfg_.dilation_last : 1;
      block.push_back(std::move(layer));
      cin = cout;
    }
    blocks_.push_back(std::move(block));
  }
}

Tensor Backbone::extract(const Tensor& image) const {
  if (image.shape().size() != 3 || image.dim(2) != 3)
    throw DimensionError("backbone expects an [H,W,3] image");
  if (image.dim(0) != cfg_.input_h || image.dim(1) != cfg_.input_w)
    throw DimensionError("image extents do not match the backbone config");
  Tensor x = image;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    for (const Conv& layer : blocks_[b])
      x = relu(add_channel_bias(conv2d(x, layer.kernel, 1, layer.dilation, Pad::Same),
                                layer.bias));
    if (b <= 2)
      x = maxpool2d(x, 2, 2);
    else if (b == 3)
      x = maxpool2d(x, 2, 1, Pad::Same);
  }
  return x;
}

std::vector<std::pair<std::string, Tensor>> Backbone::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    for (std::size_t i = 0; i < blocks_[b].size(); ++i) {
      const std::string base =
          "backbone.b" + std::to_string(b + 1) + ".c" + std::to_string(i + 1);
      out.emplace_back(base + ".kernel", blocks_[b][i].kernel);
      out.emplace_back(base + ".bias", blocks_[b][i].bias);
    }
  return out;
}

}  // namespace drivesal
