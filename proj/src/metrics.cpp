#include "drivesal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drivesal/errors.hpp"

namespace drivesal {

namespace {

constexpr double kVarianceFloor = 1e-24;

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void count_classes(const std::vector<int>& labels, std::size_t& pos, std::size_t& neg) {
  pos = neg = 0;
  for (int y : labels) {
    if (y == 1)
      ++pos;
    else if (y == 0)
      ++neg;
    else
      throw ArgumentError("labels must be 0 or 1");
  }
  if (pos == 0 || neg == 0) throw ArgumentError("need both classes for a ROC curve");
}

}  // namespace

double pearson_cc(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty()) throw ArgumentError("pearson_cc needs at least one value");
  if (a.size() != b.size()) throw DimensionError("pearson_cc inputs differ in length");
  const double ma = mean_of(a), mb = mean_of(b);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  const double n = static_cast<double>(a.size());
  cov /= n;
  va /= n;
  vb /= n;
  if (va < kVarianceFloor || vb < kVarianceFloor)
    throw DegenerateInputError("pearson_cc needs non-constant inputs");
  return cov / std::sqrt(va * vb);
}

double kld(const std::vector<double>& t, const std::vector<double>& p, double epsilon) {
  if (t.size() != p.size()) throw DimensionError("kld inputs differ in length");
  if (t.empty()) throw ArgumentError("kld needs at least one value");
  if (epsilon <= 0.0) throw ConfigError("kld epsilon must be > 0");
  const double st = std::accumulate(t.begin(), t.end(), 0.0);
  const double sp = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(st - 1.0) > 1e-6 || std::abs(sp - 1.0) > 1e-6)
    throw ArgumentError("kld expects sum-normalized maps");
  double out = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    out += t[i] * std::log(t[i] / (p[i] + epsilon) + epsilon);
  return out;
}

double nss_metric(const std::vector<double>& pred, const std::vector<double>& fix) {
  if (pred.size() != fix.size()) throw DimensionError("nss inputs differ in length");
  if (pred.empty()) throw ArgumentError("nss needs at least one value");
  std::size_t ones = 0;
  for (double v : fix) {
    if (v == 1.0)
      ++ones;
    else if (v != 0.0)
      throw ArgumentError("fixation map must be exactly binary");
  }
  if (ones == 0) throw ArgumentError("fixation map has no fixations");
  const double mu = mean_of(pred);
  double var = 0.0;
  for (double v : pred) var += (v - mu) * (v - mu);
  var /= static_cast<double>(pred.size());
  if (var < kVarianceFloor) throw DegenerateInputError("nss needs a non-constant prediction");
  const double sd = std::sqrt(var);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (fix[i] == 1.0) acc += (pred[i] - mu) / sd;
  return acc / static_cast<double>(ones);
}

std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw DimensionError("roc_curve scores and labels differ in length");
  std::size_t pos = 0, neg = 0;
  count_classes(labels, pos, neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> points{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      if (labels[order[i]] == 1)
        ++tp;
      else
        ++fp;
    }
    points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                      static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return points;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  const std::vector<RocPoint> points = roc_curve(scores, labels);
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  return area;
}

}  // namespace drivesal
