#pragma once

#include <vector>

#include "drivesal/tensor.hpp"

namespace drivesal {

struct LossConfig {
  double epsilon = 1e-7;
  double w_kl = 1.0;
  double w_cc = 1.0;
  double w_nss = 1.0;
  bool nss_enabled = true;

  void validate() const;  // ConfigError on violation
};

// Regularized divergence sum(t * log(t / (p + eps) + eps)). Both maps must
// already sum to 1 (checked within 1e-6).
Tensor kl_loss(const Tensor& y_true, const Tensor& y_pred, double epsilon);

// 1 - r^2 with the population Pearson r; affine-invariant in either argument.
Tensor cc_loss(const Tensor& y_true, const Tensor& y_pred);

// Mean standardized prediction at fixated pixels; y_fix binary with >= 1 one.
Tensor nss(const Tensor& y_pred, const Tensor& y_fix);
Tensor nss_loss(const Tensor& y_pred, const Tensor& y_fix);

// Mean binary cross-entropy; probs clamped to [1e-7, 1 - 1e-7].
Tensor bce_loss(const std::vector<double>& labels, const Tensor& probs);

// Weighted sum of the enabled terms over sum-normalized maps. Zero-weight
// terms are skipped outright, so their degeneracy rules never fire; the nss
// term also needs nss_enabled and a fixation map.
Tensor combined_loss(const Tensor& y_true, const Tensor& y_pred, const Tensor* y_fix,
                     const LossConfig& config);

// Same computation, also reporting each enabled term's unweighted value.
struct LossBreakdown {
  Tensor total;
  double kl = 0.0;
  double cc = 0.0;
  double nss = 0.0;
};
LossBreakdown combined_loss_breakdown(const Tensor& y_true, const Tensor& y_pred,
                                      const Tensor* y_fix, const LossConfig& config);

}  // namespace drivesal
