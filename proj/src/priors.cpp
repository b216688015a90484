#include "drivesal/priors.hpp"

#include <cmath>

#include "drivesal/init.hpp"
#include "drivesal/rng.hpp"

namespace drivesal {

namespace {

constexpr double kTwoPi = 6.283185307179586;

// Feature activations run two orders of magnitude below the prior peaks, so
// an even readout init leaves the map prior-dominated and nearly
// image-independent. Boost feature weights and damp priors to start
// image-driven.
constexpr double kFeatureGain = 5.0;
constexpr double kPriorGain = 0.2;

// Constant [H,W,1] grids of normalized cell-center coordinates.
Tensor grid_x(int hf, int wf) {
  std::vector<double> v(static_cast<std::size_t>(hf) * wf);
  for (int i = 0; i < hf; ++i)
    for (int j = 0; j < wf; ++j)
      v[static_cast<std::size_t>(i) * wf + j] = (j + 0.5) / wf;
  return Tensor::from_data({hf, wf, 1}, std::move(v));
}

Tensor grid_y(int hf, int wf) {
  std::vector<double> v(static_cast<std::size_t>(hf) * wf);
  for (int i = 0; i < hf; ++i)
    for (int j = 0; j < wf; ++j)
      v[static_cast<std::size_t>(i) * wf + j] = (i + 0.5) / hf;
  return Tensor::from_data({hf, wf, 1}, std::move(v));
}

void check_grid(int hf, int wf) {
  if (hf < 1 || wf < 1) throw ArgumentError("prior grid extents must be >= 1");
}

Tensor positive_width(const Tensor& raw, const char* what) {
  Tensor s = softplus(raw);
  if (s.scalar_value() <= 0.0)
    throw DomainError(std::string(what) + " underflowed to a non-positive width");
  return s;
}

}  // namespace

PriorVariant parse_variant(const std::string& name) {
  if (name == "NCB") return {PriorKind::None, 0};
  if (name == "G16") return {PriorKind::Gaussian, 16};
  if (name == "G32") return {PriorKind::Gaussian, 32};
  if (name == "RBF16") return {PriorKind::Rbf, 16};
  if (name == "RBF32") return {PriorKind::Rbf, 32};
  throw ConfigError("unknown prior variant: " + name);
}

std::string variant_name(const PriorVariant& v) {
  switch (v.kind) {
    case PriorKind::None:
      return "NCB";
    case PriorKind::Gaussian:
      return "G" + std::to_string(v.count);
    case PriorKind::Rbf:
      return "RBF" + std::to_string(v.count);
  }
  throw ConfigError("invalid prior variant");
}

Tensor gaussian_prior_map(const GaussianPrior& p, int hf, int wf) {
  check_grid(hf, wf);
  Tensor sx = positive_width(p.raw_sigma_x, "sigma_x");
  Tensor sy = positive_width(p.raw_sigma_y, "sigma_y");
  Tensor dx = sub(grid_x(hf, wf), p.mu_x);
  Tensor dy = sub(grid_y(hf, wf), p.mu_y);
  Tensor two = Tensor::scalar(2.0);
  Tensor tx = div(mul(dx, dx), mul(two, mul(sx, sx)));
  Tensor ty = div(mul(dy, dy), mul(two, mul(sy, sy)));
  Tensor norm = div(Tensor::scalar(1.0), mul(Tensor::scalar(kTwoPi), mul(sx, sy)));
  return mul(norm, exp(neg(add(tx, ty))));
}

Tensor rbf_prior_map(const RbfPrior& p, int hf, int wf) {
  check_grid(hf, wf);
  Tensor eps = positive_width(p.raw_eps, "eps");
  Tensor dx = sub(grid_x(hf, wf), p.cx);
  Tensor dy = sub(grid_y(hf, wf), p.cy);
  Tensor r2 = add(mul(dx, dx), mul(dy, dy));
  return mul(p.weight, exp(neg(mul(eps, r2))));
}

Tensor append_priors(const Tensor& features, const std::vector<Tensor>& prior_maps) {
  if (prior_maps.empty()) return features;
  std::vector<Tensor> parts;
  parts.reserve(prior_maps.size() + 1);
  parts.push_back(features);
  for (const Tensor& m : prior_maps) parts.push_back(m);
  return concat_channels(parts);
}

PriorBank::PriorBank(PriorVariant variant, std::uint64_t seed) : variant_(variant) {
  if (variant_.kind == PriorKind::None) {
    if (variant_.count != 0) throw ConfigError("NCB cannot carry prior channels");
    return;
  }
  if (variant_.count < 1) throw ConfigError("prior count must be >= 1");
  Rng rng(seed);
  if (variant_.kind == PriorKind::Gaussian) {
    for (int k = 0; k < variant_.count; ++k) {
      GaussianPrior p;
      p.mu_x = Tensor::scalar(0.5, true);
      p.mu_y = Tensor::scalar(0.5, true);
      p.raw_sigma_x = Tensor::scalar(inverse_softplus(rng.uniform(0.1, 0.3)), true);
      p.raw_sigma_y = Tensor::scalar(inverse_softplus(rng.uniform(0.1, 0.3)), true);
      gaussians_.push_back(std::move(p));
    }
    return;
  }
  // RBF centers on a near-square lattice over [0.2, 0.8]^2, row-major.
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(variant_.count))));
  const int rows = (variant_.count + cols - 1) / cols;
  auto lattice = [](int idx, int extent) {
    return extent == 1 ? 0.5 : 0.2 + 0.6 * idx / (extent - 1);
  };
  for (int k = 0; k < variant_.count; ++k) {
    RbfPrior p;
    p.cx = Tensor::scalar(lattice(k % cols, cols), true);
    p.cy = Tensor::scalar(lattice(k / cols, rows), true);
    p.raw_eps = Tensor::scalar(inverse_softplus(10.0), true);
    p.weight = Tensor::scalar(1.0, true);
    rbfs_.push_back(std::move(p));
  }
}

std::vector<Tensor> PriorBank::maps(int hf, int wf) const {
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(variant_.count));
  for (const GaussianPrior& p : gaussians_) out.push_back(gaussian_prior_map(p, hf, wf));
  for (const RbfPrior& p : rbfs_) out.push_back(rbf_prior_map(p, hf, wf));
  return out;
}

std::vector<std::pair<std::string, Tensor>> PriorBank::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t k = 0; k < gaussians_.size(); ++k) {
    const std::string base = "prior.g" + std::to_string(k);
    out.emplace_back(base + ".mu_x", gaussians_[k].mu_x);
    out.emplace_back(base + ".mu_y", gaussians_[k].mu_y);
    out.emplace_back(base + ".raw_sigma_x", gaussians_[k].raw_sigma_x);
    out.emplace_back(base + ".raw_sigma_y", gaussians_[k].raw_sigma_y);
  }
  for (std::size_t k = 0; k < rbfs_.size(); ++k) {
    const std::string base = "prior.rbf" + std::to_string(k);
    out.emplace_back(base + ".cx", rbfs_[k].cx);
    out.emplace_back(base + ".cy", rbfs_[k].cy);
    out.emplace_back(base + ".raw_eps", rbfs_[k].raw_eps);
    out.emplace_back(base + ".weight", rbfs_[k].weight);
  }
  return out;
}

Readout::Readout(int feature_channels, int prior_channels, int factor, std::uint64_t seed)
    : factor_(factor) {
  if (feature_channels < 1) throw ConfigError("readout feature channels must be >= 1");
  if (prior_channels < 0) throw ConfigError("readout prior channels must be >= 0");
  if (factor < 1) throw ConfigError("readout upsample factor must be >= 1");
  const int in_channels = feature_channels + prior_channels;
  Rng rng(seed);
  // Half-normal weights plus a positive bias: every incoming channel is
  // non-negative, so the map starts alive instead of gambling on the relu.
  Tensor raw = he_tensor({1, 1, in_channels, 1}, static_cast<std::size_t>(in_channels), rng);
  std::vector<double> folded = raw.data();
  for (int c = 0; c < in_channels; ++c)
    folded[c] = std::abs(folded[c]) * (c < feature_channels ? kFeatureGain : kPriorGain);
  kernel_ = Tensor::from_data({1, 1, in_channels, 1}, std::move(folded), true);
  bias_ = Tensor::full({1}, 0.25, true);
}

Tensor Readout::apply(const Tensor& combined) const {
  Tensor y = relu(add_channel_bias(conv2d(combined, kernel_, 1, 1, Pad::Same), bias_));
  return upsample_bilinear(y, factor_);
}

std::vector<std::pair<std::string, Tensor>> Readout::named_parameters() const {
  return {{"readout.kernel", kernel_}, {"readout.bias", bias_}};
}

}  // namespace drivesal
