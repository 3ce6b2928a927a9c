#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memdex/dataset.hpp"

namespace memdex {

enum class MuMode {
  kAllTraining,  // mean distance to every admissible training vector
  kPerClass,     // mean distance to the admissible vectors of the target class
};

struct DeepScoreConfig {
  MuMode mu_mode = MuMode::kAllTraining;
  bool exclude_self_subject = true;
  double mu_floor = 1e-12;
};

// Labeled deep vectors in canonical order. All vectors share one dimension
// and one representation (all real or all binary).
class DeepTrainingSet {
 public:
  DeepTrainingSet(const DatasetView& view, LabelKind kind);
  DeepTrainingSet(std::vector<DeepVector> vectors, std::vector<std::string> labels,
                  std::vector<std::string> subject_ids);

  std::size_t size() const { return vectors_.size(); }
  std::size_t dim() const { return dim_; }
  bool is_binary() const { return binary_; }

  const DeepVector& vector(std::size_t i) const { return vectors_[i]; }
  std::uint32_t class_of(std::size_t i) const { return class_of_[i]; }
  const std::string& subject_of(std::size_t i) const { return subject_ids_[i]; }
  std::span<const std::string> class_names() const { return names_; }
  std::optional<std::uint32_t> find_class(std::string_view label) const;
  std::optional<std::size_t> find_subject(std::string_view subject_id) const;

 private:
  void finalize(std::vector<std::string> labels);

  std::size_t dim_ = 0;
  bool binary_ = false;
  std::vector<DeepVector> vectors_;
  std::vector<std::string> subject_ids_;
  std::vector<std::uint32_t> class_of_;
  std::vector<std::string> names_;
};

inline constexpr std::size_t kNoExclusion = static_cast<std::size_t>(-1);

// log( (1/N_k) sum_j exp(-|v - v_j|^2 / mu^2) [C_j = C_k] + 1 ).
// Strict: a class without admissible vectors raises kMissingEvidence.
double deep_log_likelihood(const DeepVector& query, const DeepTrainingSet& training,
                           std::string_view target_class, const DeepScoreConfig& cfg,
                           std::string_view query_subject = {});

// Batch form; classes lacking admissible vectors score the 0 noise floor.
std::map<std::string, double> batch_deep_scores(const DeepVector& query,
                                                const DeepTrainingSet& training,
                                                std::span<const std::string> class_set,
                                                const DeepScoreConfig& cfg,
                                                std::string_view query_subject = {});

std::vector<double> deep_scores_dense(const DeepVector& query, const DeepTrainingSet& training,
                                      std::span<const std::uint32_t> class_ids,
                                      const DeepScoreConfig& cfg, std::size_t excluded,
                                      bool strict);

}  // namespace memdex
