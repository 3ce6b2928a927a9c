#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memdex/ann_index.hpp"
#include "memdex/dataset.hpp"
#include "memdex/parallel.hpp"

namespace memdex {

struct ShallowScoreConfig {
  std::size_t k_trunc = 64;  // kAllNeighbors disables truncation
  // kExact forces a linear-scan dNN even over an approximate index.
  SearchMode dnn_mode = SearchMode::kApproximate;
  bool exclude_self_subject = true;
};

// Adaptive kernel width of one query keypoint: 1 + dNN^2.
struct KeypointBandwidth {
  double dnn = 0.0;
  double value() const { return 1.0 + dnn * dnn; }
};

// Keypoint-set log-likelihood
//   sum_i log( (1/N_k) sum_j exp(-|f_i - f_j|^2 / (1 + dNN_i^2)) [C_j = C_k] + 1 )
// over the k_trunc nearest admissible training keypoints. dNN_i is taken over
// all classes; the query subject's own keypoints are inadmissible when
// exclude_self_subject is set and query_subject names an indexed owner.
// Unknown or empty classes score 0, the background floor.
double keypoint_log_likelihood(std::span<const Keypoint> query, const DescriptorIndex& idx,
                               std::string_view target_class, LabelKind kind,
                               const ShallowScoreConfig& cfg,
                               std::string_view query_subject = {});

// Scores one query subject against every class in class_set with a single
// neighbor search per keypoint. Equal bit-for-bit to per-class calls.
std::map<std::string, double> batch_shallow_scores(const SubjectRecord& query,
                                                   const DescriptorIndex& idx,
                                                   std::span<const std::string> class_set,
                                                   LabelKind kind, const ShallowScoreConfig& cfg,
                                                   Execution exec = Execution::kSerial);

// Dense form used by the all-pairs driver: class ids index idx.class_names(kind).
// Terms are reduced per class in ascending value order, which makes the result
// independent of keypoint order and of how the per-keypoint loop is scheduled.
std::vector<double> shallow_scores_dense(std::span<const Keypoint> query,
                                         const DescriptorIndex& idx,
                                         std::span<const std::uint32_t> class_ids, LabelKind kind,
                                         const ShallowScoreConfig& cfg,
                                         std::uint32_t excluded_owner, Execution exec);

}  // namespace memdex
