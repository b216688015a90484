#include "drivesal/losses.hpp"

#include <cmath>

namespace drivesal {

namespace {

constexpr double kVarianceFloor = 1e-24;  // below this a map counts as constant

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) throw DimensionError(std::string(what) + ": shape mismatch");
}

void check_normalized(const Tensor& m, const char* what) {
  double total = 0.0;
  for (double v : m.data()) total += v;
  if (std::abs(total - 1.0) > 1e-6)
    throw ArgumentError(std::string(what) + " expects sum-normalized maps");
}

// Population variance node plus the centered tensor, shared by cc and nss.
struct Centered {
  Tensor diff;
  Tensor var;
};

Centered center(const Tensor& x) {
  Tensor d = sub(x, mean(x));
  return {d, mean(mul(d, d))};
}

void check_binary_fixations(const Tensor& y_fix, std::size_t& ones) {
  ones = 0;
  for (double v : y_fix.data()) {
    if (v == 1.0)
      ++ones;
    else if (v != 0.0)
      throw ArgumentError("fixation map must be exactly binary");
  }
  if (ones == 0) throw ArgumentError("fixation map has no fixations");
}

}  // namespace

void LossConfig::validate() const {
  if (epsilon <= 0.0) throw ConfigError("loss epsilon must be > 0");
  if (w_kl < 0.0 || w_cc < 0.0 || w_nss < 0.0)
    throw ConfigError("loss weights must be >= 0");
}

Tensor kl_loss(const Tensor& y_true, const Tensor& y_pred, double epsilon) {
  check_same_shape(y_true, y_pred, "kl_loss");
  if (epsilon <= 0.0) throw ConfigError("kl_loss epsilon must be > 0");
  check_normalized(y_true, "kl_loss");
  check_normalized(y_pred, "kl_loss");
  Tensor eps = Tensor::scalar(epsilon);
  return sum(mul(y_true, log(add(div(y_true, add(y_pred, eps)), eps))));
}

Tensor cc_loss(const Tensor& y_true, const Tensor& y_pred) {
  check_same_shape(y_true, y_pred, "cc_loss");
  Centered t = center(y_true);
  Centered p = center(y_pred);
  if (t.var.scalar_value() < kVarianceFloor || p.var.scalar_value() < kVarianceFloor)
    throw DegenerateInputError("cc_loss needs non-constant maps");
  Tensor cov = mean(mul(t.diff, p.diff));
  Tensor r2 = div(mul(cov, cov), mul(t.var, p.var));
  return sub(Tensor::scalar(1.0), r2);
}

Tensor nss(const Tensor& y_pred, const Tensor& y_fix) {
  check_same_shape(y_pred, y_fix, "nss");
  std::size_t ones = 0;
  check_binary_fixations(y_fix, ones);
  Centered p = center(y_pred);
  if (p.var.scalar_value() < kVarianceFloor)
    throw DegenerateInputError("nss needs a non-constant prediction");
  Tensor standardized = div(p.diff, sqrt(p.var));
  return div(sum(mul(standardized, y_fix)), Tensor::scalar(static_cast<double>(ones)));
}

Tensor nss_loss(const Tensor& y_pred, const Tensor& y_fix) { return neg(nss(y_pred, y_fix)); }

Tensor bce_loss(const std::vector<double>& labels, const Tensor& probs) {
  if (labels.empty()) throw ArgumentError("bce_loss needs at least one sample");
  if (probs.shape().size() != 1 || probs.size() != labels.size())
    throw DimensionError("bce_loss labels and probabilities differ in length");
  const int n = static_cast<int>(labels.size());
  std::vector<double> pos(labels.size()), negw(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0)
      throw ArgumentError("bce_loss labels must be exactly binary");
    pos[i] = labels[i];
    negw[i] = 1.0 - labels[i];
  }
  Tensor y = Tensor::from_data({n}, std::move(pos));
  Tensor ny = Tensor::from_data({n}, std::move(negw));
  Tensor p = clamp(probs, 1e-7, 1.0 - 1e-7);
  Tensor per = add(mul(y, log(p)), mul(ny, log(sub(Tensor::scalar(1.0), p))));
  return neg(div(sum(per), Tensor::scalar(static_cast<double>(n))));
}

LossBreakdown combined_loss_breakdown(const Tensor& y_true, const Tensor& y_pred,
                                      const Tensor* y_fix, const LossConfig& config) {
  config.validate();
  if (config.nss_enabled && config.w_nss > 0.0 && y_fix == nullptr)
    throw ArgumentError("nss term enabled but no fixation map supplied");
  LossBreakdown out;
  auto accumulate = [&out](double w, Tensor term) {
    if (w != 1.0) term = mul(Tensor::scalar(w), term);
    out.total = out.total.defined() ? add(out.total, term) : term;
  };
  if (config.w_kl > 0.0) {
    const Tensor term = kl_loss(y_true, y_pred, config.epsilon);
    out.kl = term.scalar_value();
    accumulate(config.w_kl, term);
  }
  if (config.w_cc > 0.0) {
    const Tensor term = cc_loss(y_true, y_pred);
    out.cc = term.scalar_value();
    accumulate(config.w_cc, term);
  }
  if (config.nss_enabled && config.w_nss > 0.0) {
    const Tensor term = nss_loss(y_pred, *y_fix);
    out.nss = term.scalar_value();
    accumulate(config.w_nss, term);
  }
  if (!out.total.defined()) throw ConfigError("combined_loss has no enabled terms");
  return out;
}

Tensor combined_loss(const Tensor& y_true, const Tensor& y_pred, const Tensor* y_fix,
                     const LossConfig& config) {
  return combined_loss_breakdown(y_true, y_pred, y_fix, config).total;
}

}  // namespace drivesal
