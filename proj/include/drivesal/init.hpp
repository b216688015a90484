#pragma once

#include <cmath>
#include <vector>

#include "drivesal/rng.hpp"
#include "drivesal/tensor.hpp"

namespace drivesal {

// He fan-in initialization: N(0, sqrt(2/fan_in)).
inline Tensor he_tensor(std::vector<int> shape, std::size_t fan_in, Rng& rng) {
  std::vector<double> w(detail::shape_numel(shape));
  const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : w) v = rng.normal() * scale;
  return Tensor::from_data(std::move(shape), std::move(w), true);
}

// Raw value r with softplus(r) == y, for positive-parameter reparameterization.
inline double inverse_softplus(double y) { return std::log(std::expm1(y)); }

}  // namespace drivesal
