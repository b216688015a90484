#include "drivesal/mapnorm.hpp"

#include "drivesal/errors.hpp"

namespace drivesal {

namespace {
// Separates true constants (rounding noise ~1e-32) from legitimate variance.
constexpr double kVarianceFloor = 1e-24;
}  // namespace

Tensor normalize_map(const Tensor& map, NormMode mode) {
  switch (mode) {
    case NormMode::SumToOne: {
      const Tensor total = sum(map);
      if (!(total.scalar_value() > 0.0)) {
        throw DegenerateInputError("normalize_map(sum_to_one): map has no positive mass");
      }
      return div(map, total);
    }
    case NormMode::Standardize: {
      const Tensor centered = sub(map, mean(map));
      const Tensor variance = mean(mul(centered, centered));
      if (variance.scalar_value() < kVarianceFloor) {
        throw DegenerateInputError("normalize_map(standardize): map variance is zero");
      }
      return div(centered, sqrt(variance));
    }
    case NormMode::MaxToOne: {
      const Tensor peak = reduce_max(map);
      if (!(peak.scalar_value() > 0.0)) {
        throw DegenerateInputError("normalize_map(max_to_one): map peak is not positive");
      }
      return div(map, peak);
    }
  }
  throw ArgumentError("normalize_map: unknown mode");
}

}  // namespace drivesal
