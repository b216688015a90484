#pragma once

#include <vector>

namespace drivesal {

// Plain-double evaluation counterparts of the training losses. All are pure.

double pearson_cc(const std::vector<double>& a, const std::vector<double>& b);

// sum(t * log(t / (p + eps) + eps)) over sum-normalized inputs.
double kld(const std::vector<double>& t, const std::vector<double>& p, double epsilon);

double nss_metric(const std::vector<double>& pred, const std::vector<double>& fix);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// One point per distinct score threshold, descending, bracketed by (0,0)
// and (1,1). Needs both classes present.
std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels);

// Trapezoidal area under roc_curve; equals the Mann-Whitney pair statistic.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace drivesal
