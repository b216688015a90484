#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drivesal/tensor.hpp"

namespace drivesal {

enum class PriorKind { None, Gaussian, Rbf };

struct PriorVariant {
  PriorKind kind = PriorKind::None;
  int count = 0;
};

// Names: NCB, G16, G32, RBF16, RBF32. Throws ConfigError on anything else.
PriorVariant parse_variant(const std::string& name);
std::string variant_name(const PriorVariant& v);

// One learnable central-bias Gaussian. Widths are kept positive through a
// softplus of the raw stored values.
struct GaussianPrior {
  Tensor mu_x, mu_y;                // [1]
  Tensor raw_sigma_x, raw_sigma_y;  // [1], sigma = softplus(raw)
};

// One weighted radial-basis kernel with a learnable center.
struct RbfPrior {
  Tensor cx, cy;    // [1]
  Tensor raw_eps;   // [1], eps = softplus(raw)
  Tensor weight;    // [1]
};

// Both evaluate on normalized cell-center coordinates ((j+0.5)/W, (i+0.5)/H)
// and stay differentiable w.r.t. every parameter.
Tensor gaussian_prior_map(const GaussianPrior& p, int hf, int wf);
Tensor rbf_prior_map(const RbfPrior& p, int hf, int wf);

// Channel-concatenates features then priors; empty prior list passes the
// features through untouched.
Tensor append_priors(const Tensor& features, const std::vector<Tensor>& prior_maps);

class PriorBank {
 public:
  PriorBank(PriorVariant variant, std::uint64_t seed);

  std::vector<Tensor> maps(int hf, int wf) const;
  const PriorVariant& variant() const { return variant_; }
  int count() const { return variant_.count; }
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;

 private:
  PriorVariant variant_;
  std::vector<GaussianPrior> gaussians_;
  std::vector<RbfPrior> rbfs_;
};

// 1x1 conv to one channel, relu for non-negativity, bilinear upsample.
// Weights are initialized per channel group: backbone features arrive much
// smaller than the prior peaks, so feature weights start larger and prior
// weights damped, keeping the initial map image-driven.
class Readout {
 public:
  Readout(int feature_channels, int prior_channels, int factor, std::uint64_t seed);

  Tensor apply(const Tensor& combined) const;
  int factor() const { return factor_; }
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;

 private:
  int factor_ = 1;
  Tensor kernel_;  // [1,1,Cin,1]
  Tensor bias_;    // [1]
};

}  // namespace drivesal
