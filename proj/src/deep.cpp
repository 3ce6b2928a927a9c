#include "memdex/deep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memdex/error.hpp"

namespace memdex {

DeepTrainingSet::DeepTrainingSet(const DatasetView& view, LabelKind kind) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < view.size(); ++i) {
    const SubjectRecord& s = view.subject(i);
    if (!s.deep_vector) continue;
    vectors_.push_back(*s.deep_vector);
    labels.push_back(label_of(s, kind));
    subject_ids_.push_back(s.subject_id);
  }
  finalize(std::move(labels));
}

DeepTrainingSet::DeepTrainingSet(std::vector<DeepVector> vectors, std::vector<std::string> labels,
                                 std::vector<std::string> subject_ids)
    : vectors_(std::move(vectors)), subject_ids_(std::move(subject_ids)) {
  if (labels.size() != vectors_.size() || subject_ids_.size() != vectors_.size()) {
    fail(ErrorCode::kInvalidArgument, "training vectors, labels and ids differ in length");
  }
  finalize(std::move(labels));
}

void DeepTrainingSet::finalize(std::vector<std::string> labels) {
  if (!vectors_.empty()) {
    dim_ = vectors_.front().dim();
    binary_ = vectors_.front().is_binary();
  }
  for (const DeepVector& v : vectors_) {
    if (v.dim() != dim_) fail(ErrorCode::kDimensionMismatch, "training vectors differ in dimension");
    if (v.is_binary() != binary_) {
      fail(ErrorCode::kBinaryMismatch, "training set mixes binary and real-valued vectors");
    }
  }
  names_ = labels;
  std::sort(names_.begin(), names_.end());
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
  class_of_.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    class_of_[i] = static_cast<std::uint32_t>(
        std::lower_bound(names_.begin(), names_.end(), labels[i]) - names_.begin());
  }
}

std::optional<std::uint32_t> DeepTrainingSet::find_class(std::string_view label) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), label);
  if (it == names_.end() || *it != label) return std::nullopt;
  return static_cast<std::uint32_t>(it - names_.begin());
}

std::optional<std::size_t> DeepTrainingSet::find_subject(std::string_view subject_id) const {
  for (std::size_t i = 0; i < subject_ids_.size(); ++i) {
    if (subject_ids_[i] == subject_id) return i;
  }
  return std::nullopt;
}

std::vector<double> deep_scores_dense(const DeepVector& query, const DeepTrainingSet& training,
                                      std::span<const std::uint32_t> class_ids,
                                      const DeepScoreConfig& cfg, std::size_t excluded,
                                      bool strict) {
  if (!(cfg.mu_floor > 0.0)) fail(ErrorCode::kInvalidArgument, "mu_floor must be positive");
  if (training.size() > 0) {
    if (query.dim() != training.dim()) {
      fail(ErrorCode::kDimensionMismatch, "query vector has dimension " +
                                              std::to_string(query.dim()) + ", training has " +
                                              std::to_string(training.dim()));
    }
    if (query.is_binary() != training.is_binary()) {
      fail(ErrorCode::kBinaryMismatch, "query and training vectors mix binary and real values");
    }
  }
  const std::size_t n_classes = training.class_names().size();
  std::vector<double> sq(training.size(), 0.0);
  std::vector<double> dist_sum(n_classes, 0.0);
  std::vector<std::size_t> count(n_classes, 0);
  double all_sum = 0.0;
  std::size_t all_count = 0;
  for (std::size_t j = 0; j < training.size(); ++j) {
    if (j == excluded) continue;
    sq[j] = squared_distance(query, training.vector(j));
    const double d = std::sqrt(sq[j]);
    all_sum += d;
    ++all_count;
    dist_sum[training.class_of(j)] += d;
    ++count[training.class_of(j)];
  }
  if (all_count == 0) fail(ErrorCode::kMissingEvidence, "no admissible training vectors");

  auto mu_for = [&](std::uint32_t cls) {
    const double mean = cfg.mu_mode == MuMode::kAllTraining
                            ? all_sum / static_cast<double>(all_count)
                            : dist_sum[cls] / static_cast<double>(count[cls]);
    return std::max(cfg.mu_floor, mean);
  };

  // Per-class mu^2 for requested classes; NaN marks classes not requested.
  std::vector<double> mu_sq(n_classes, std::numeric_limits<double>::quiet_NaN());
  for (const std::uint32_t cls : class_ids) {
    if (cls >= n_classes) fail(ErrorCode::kInvalidArgument, "class id out of range");
    if (count[cls] == 0) {
      if (strict) {
        fail(ErrorCode::kMissingEvidence,
             "class " + training.class_names()[cls] + " has no admissible training vectors");
      }
      continue;
    }
    const double mu = mu_for(cls);
    mu_sq[cls] = mu * mu;
  }
  std::vector<double> mass(n_classes, 0.0);
  for (std::size_t j = 0; j < training.size(); ++j) {
    if (j == excluded) continue;
    const std::uint32_t cls = training.class_of(j);
    if (std::isnan(mu_sq[cls])) continue;
    mass[cls] += std::exp(-sq[j] / mu_sq[cls]);
  }

  std::vector<double> scores(class_ids.size(), 0.0);
  for (std::size_t s = 0; s < class_ids.size(); ++s) {
    const std::uint32_t cls = class_ids[s];
    if (count[cls] == 0) continue;
    scores[s] = std::log1p(mass[cls] / static_cast<double>(count[cls]));
  }
  return scores;
}

namespace {

std::size_t excluded_index(const DeepTrainingSet& training, const DeepScoreConfig& cfg,
                           std::string_view query_subject) {
  if (!cfg.exclude_self_subject || query_subject.empty()) return kNoExclusion;
  return training.find_subject(query_subject).value_or(kNoExclusion);
}

}  // namespace

double deep_log_likelihood(const DeepVector& query, const DeepTrainingSet& training,
                           std::string_view target_class, const DeepScoreConfig& cfg,
                           std::string_view query_subject) {
  const auto cls = training.find_class(target_class);
  if (!cls) {
    fail(ErrorCode::kMissingEvidence,
         "class " + std::string(target_class) + " has no training vectors");
  }
  const std::uint32_t ids[] = {*cls};
  return deep_scores_dense(query, training, ids, cfg,
                           excluded_index(training, cfg, query_subject), true)
      .front();
}

std::map<std::string, double> batch_deep_scores(const DeepVector& query,
                                                const DeepTrainingSet& training,
                                                std::span<const std::string> class_set,
                                                const DeepScoreConfig& cfg,
                                                std::string_view query_subject) {
  std::vector<std::uint32_t> ids;
  std::vector<std::string> known;
  std::map<std::string, double> out;
  for (const auto& label : class_set) {
    if (auto cls = training.find_class(label)) {
      ids.push_back(*cls);
      known.push_back(label);
    } else {
      out[label] = 0.0;
    }
  }
  const auto scores = deep_scores_dense(query, training, ids, cfg,
                                        excluded_index(training, cfg, query_subject), false);
  for (std::size_t s = 0; s < ids.size(); ++s) out[known[s]] = scores[s];
  return out;
}

}  // namespace memdex
