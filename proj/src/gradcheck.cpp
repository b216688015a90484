#include "drivesal/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace drivesal {

double grad_check(const std::function<Tensor()>& build, const std::vector<Tensor>& params,
                  double step) {
  if (!(step > 0.0)) throw ArgumentError("grad_check step must be positive");

  Tensor loss = build();
  if (loss.size() != 1) throw ArgumentError("grad_check loss must be scalar");
  if (!std::isfinite(loss.scalar_value())) throw NumericError("grad_check loss is not finite");

  for (const Tensor& p : params) p.zero_grad();
  loss.backward();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const Tensor& p : params) analytic.push_back(p.grad());

  double max_rel = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Tensor& p = params[pi];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p.at(i);
      p.set_value(i, orig + step);
      const double up = build().scalar_value();
      p.set_value(i, orig - step);
      const double down = build().scalar_value();
      p.set_value(i, orig);
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NumericError("grad_check produced a non-finite loss during perturbation");
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[pi][i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace drivesal
