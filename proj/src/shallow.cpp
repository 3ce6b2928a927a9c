#include "memdex/shallow.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "memdex/error.hpp"

namespace memdex {

namespace {

using SlotTerm = std::pair<std::uint32_t, double>;

// Per-keypoint contribution log(mass_k / N_k + 1) for every requested slot
// with non-zero mass. Mass accumulates in (distance, point index) order.
void keypoint_terms(std::span<const double> descriptor, const DescriptorIndex& idx,
                    std::span<const std::int32_t> slot_of_class,
                    std::span<const std::size_t> slot_count, LabelKind kind,
                    const ShallowScoreConfig& cfg, std::uint32_t excluded_owner,
                    std::vector<double>& mass_scratch, std::vector<SlotTerm>& out) {
  const auto neighbors = idx.nearest(descriptor, cfg.k_trunc, excluded_owner);
  if (neighbors.empty()) return;
  double dnn_sq = neighbors.front().squared_distance;
  if (cfg.dnn_mode == SearchMode::kExact && idx.mode() == SearchMode::kApproximate) {
    dnn_sq = idx.nearest_exact(descriptor, 1, excluded_owner).front().squared_distance;
  }
  const double bandwidth = 1.0 + dnn_sq;

  std::vector<std::uint32_t> touched;
  for (const Candidate& c : neighbors) {
    const std::int32_t slot = slot_of_class[idx.class_of_owner(idx.owner_of(c.point), kind)];
    if (slot < 0) continue;
    if (mass_scratch[slot] == 0.0) touched.push_back(static_cast<std::uint32_t>(slot));
    mass_scratch[slot] += std::exp(-c.squared_distance / bandwidth);
  }
  for (std::uint32_t slot : touched) {
    const double mass = mass_scratch[slot];
    mass_scratch[slot] = 0.0;
    if (mass > 0.0 && slot_count[slot] > 0) {
      out.emplace_back(slot, std::log1p(mass / static_cast<double>(slot_count[slot])));
    }
  }
}

}  // namespace

std::vector<double> shallow_scores_dense(std::span<const Keypoint> query,
                                         const DescriptorIndex& idx,
                                         std::span<const std::uint32_t> class_ids, LabelKind kind,
                                         const ShallowScoreConfig& cfg,
                                         std::uint32_t excluded_owner, Execution exec) {
  if (cfg.k_trunc == 0) fail(ErrorCode::kInvalidArgument, "k_trunc must be at least 1");
  for (const Keypoint& kp : query) {
    if (kp.descriptor.size() != idx.dim()) {
      fail(ErrorCode::kDimensionMismatch,
           "query keypoint has dimension " + std::to_string(kp.descriptor.size()) +
               ", index has " + std::to_string(idx.dim()));
    }
  }
  const std::size_t n_classes = idx.class_names(kind).size();
  std::vector<std::int32_t> slot_of_class(n_classes, -1);
  std::vector<std::size_t> slot_count(class_ids.size(), 0);
  for (std::size_t s = 0; s < class_ids.size(); ++s) {
    const std::uint32_t cls = class_ids[s];
    if (cls >= n_classes) fail(ErrorCode::kInvalidArgument, "class id out of range");
    if (slot_of_class[cls] < 0) slot_of_class[cls] = static_cast<std::int32_t>(s);
    slot_count[s] = idx.class_point_count(cls, kind, excluded_owner);
  }

  const auto n = static_cast<std::int64_t>(query.size());
  std::vector<std::vector<SlotTerm>> per_keypoint(query.size());
  if (exec == Execution::kParallel) {
#pragma omp parallel
    {
      std::vector<double> scratch(class_ids.size(), 0.0);
#pragma omp for schedule(dynamic, 8)
      for (std::int64_t i = 0; i < n; ++i) {
        keypoint_terms(query[i].descriptor, idx, slot_of_class, slot_count, kind, cfg,
                       excluded_owner, scratch, per_keypoint[i]);
      }
    }
  } else {
    std::vector<double> scratch(class_ids.size(), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      keypoint_terms(query[i].descriptor, idx, slot_of_class, slot_count, kind, cfg,
                     excluded_owner, scratch, per_keypoint[i]);
    }
  }

  std::vector<SlotTerm> terms;
  for (auto& v : per_keypoint) terms.insert(terms.end(), v.begin(), v.end());
  std::sort(terms.begin(), terms.end());
  std::vector<double> scores(class_ids.size(), 0.0);
  for (const auto& [slot, term] : terms) scores[slot] += term;
  for (std::size_t s = 0; s < class_ids.size(); ++s) {
    scores[s] = scores[static_cast<std::size_t>(slot_of_class[class_ids[s]])];
  }
  return scores;
}

double keypoint_log_likelihood(std::span<const Keypoint> query, const DescriptorIndex& idx,
                               std::string_view target_class, LabelKind kind,
                               const ShallowScoreConfig& cfg, std::string_view query_subject) {
  std::uint32_t excluded = DescriptorIndex::kNoOwner;
  if (cfg.exclude_self_subject && !query_subject.empty()) {
    if (auto o = idx.find_owner(query_subject)) excluded = *o;
  }
  const auto cls = idx.find_class(target_class, kind);
  if (!cls) {
    // N_k = 0: validate the query, then every factor is the background term.
    for (const Keypoint& kp : query) {
      if (kp.descriptor.size() != idx.dim()) {
        fail(ErrorCode::kDimensionMismatch, "query keypoint dimension differs from index");
      }
    }
    return 0.0;
  }
  const std::uint32_t ids[] = {*cls};
  return shallow_scores_dense(query, idx, ids, kind, cfg, excluded, Execution::kSerial).front();
}

std::map<std::string, double> batch_shallow_scores(const SubjectRecord& query,
                                                   const DescriptorIndex& idx,
                                                   std::span<const std::string> class_set,
                                                   LabelKind kind, const ShallowScoreConfig& cfg,
                                                   Execution exec) {
  std::uint32_t excluded = DescriptorIndex::kNoOwner;
  if (cfg.exclude_self_subject) {
    if (auto o = idx.find_owner(query.subject_id)) excluded = *o;
  }
  std::vector<std::uint32_t> ids;
  std::vector<std::string> known;
  std::map<std::string, double> out;
  for (const auto& label : class_set) {
    if (auto cls = idx.find_class(label, kind)) {
      ids.push_back(*cls);
      known.push_back(label);
    } else {
      out[label] = 0.0;
    }
  }
  if (ids.empty()) {
    for (const Keypoint& kp : query.keypoints) {
      if (kp.descriptor.size() != idx.dim()) {
        fail(ErrorCode::kDimensionMismatch, "query keypoint dimension differs from index");
      }
    }
    return out;
  }
  const auto scores = shallow_scores_dense(query.keypoints, idx, ids, kind, cfg, excluded, exec);
  for (std::size_t s = 0; s < ids.size(); ++s) out[known[s]] = scores[s];
  return out;
}

}  // namespace memdex
