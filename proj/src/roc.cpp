#include "memdex/roc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "memdex/error.hpp"

namespace memdex {

RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    fail(ErrorCode::kInvalidArgument, "scores and labels differ in length");
  }
  RocCurve roc;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) fail(ErrorCode::kNonFinite, "non-finite score");
    (labels[i] ? roc.positives : roc.negatives) += 1;
  }
  if (roc.positives == 0 || roc.negatives == 0) {
    fail(ErrorCode::kDegenerate, "ROC needs at least one positive and one negative label");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const double p = static_cast<double>(roc.positives);
  const double n = static_cast<double>(roc.negatives);
  roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  // Twice the Mann-Whitney count: each step adds dFP * (TP_before + TP_after).
  std::uint64_t doubled_area = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    const std::uint64_t tp_before = tp, fp_before = fp;
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      (labels[order[i]] ? tp : fp) += 1;
    }
    doubled_area += (fp - fp_before) * (tp + tp_before);
    roc.points.push_back({threshold, static_cast<double>(fp) / n, static_cast<double>(tp) / p});
  }
  roc.auc = static_cast<double>(doubled_area) / (2.0 * p * n);
  return roc;
}

double trapezoid_area(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

}  // namespace memdex
