#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "drivesal/tensor.hpp"

namespace drivesal {

// Compares the analytic gradient of `build()` against central finite
// differences, coordinate by coordinate, over every tensor in `params`.
// Returns the maximum relative error with denominator max(|a|, |n|, 1e-8).
// `build` must be deterministic and rebuild the graph from the current
// leaf values on every call.
double grad_check(const std::function<Tensor()>& build, const std::vector<Tensor>& params,
                  double step);

struct OpCheck {
  std::string name;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Finite-difference sweep over every differentiable primitive plus the
// composed model paths, at tiny shapes. Deterministic per seed.
std::vector<OpCheck> run_gradcheck_suite(std::uint64_t seed);

}  // namespace drivesal
