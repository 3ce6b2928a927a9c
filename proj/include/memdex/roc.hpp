#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace memdex {

struct RocPoint {
  double threshold;  // +inf for the (0, 0) origin
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

// Descending-score threshold sweep with tied scores grouped into one step.
// The area is accumulated in integer pair counts, so it equals the
// Mann-Whitney statistic with ties counted 0.5.
RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Trapezoidal area under an ROC point sequence.
double trapezoid_area(std::span<const RocPoint> points);

}  // namespace memdex
