#pragma once

#include "drivesal/tensor.hpp"

namespace drivesal {

enum class NormMode { SumToOne, Standardize, MaxToOne };

// Graph-building normalization, so training can differentiate through it.
// SumToOne divides by the total mass, Standardize subtracts the mean and
// divides by the population standard deviation, MaxToOne divides by the peak.
Tensor normalize_map(const Tensor& map, NormMode mode);

}  // namespace drivesal
