#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "memdex/ann_index.hpp"
#include "memdex/binarizer.hpp"
#include "memdex/dataset.hpp"
#include "memdex/deep.hpp"
#include "memdex/parallel.hpp"
#include "memdex/roc.hpp"
#include "memdex/shallow.hpp"

namespace memdex {

struct FusionParams {
  double alpha = 0.5;
};

// alpha * shallow + (1 - alpha) * deep.
double fuse(double shallow, double deep, const FusionParams& p);

enum class Protocol { kFamily, kGroup };
enum class ScoreMode { kShallow, kDeep, kFused };

std::string_view to_string(Protocol p);
std::string_view to_string(ScoreMode m);

struct ScoringConfig {
  ScoreMode mode = ScoreMode::kFused;
  SearchMode index_mode = SearchMode::kApproximate;
  ApproxParams approx;
  ShallowScoreConfig shallow;
  DeepScoreConfig deep;
  FusionParams fusion;
  // Binarize deep vectors before scoring. The family protocol needs a table
  // fitted on a disjoint calibration subset; the group protocol refits inside
  // every leave-one-subject-out fold unless a table is supplied.
  bool binarized = false;
  std::optional<ThresholdTable> thresholds;
};

// Directed query x candidate scores. Family protocol: candidates are the
// subjects themselves and the diagonal is invalid. Group protocol:
// candidates are the sorted group labels.
struct ScoreMatrix {
  Protocol protocol = Protocol::kFamily;
  std::vector<std::string> query_ids;
  std::vector<std::string> candidate_ids;
  bool has_shallow = false;
  bool has_deep = false;
  double alpha = 0.5;  // weight of the stored fused column
  std::vector<double> shallow;
  std::vector<double> deep;
  std::vector<std::uint8_t> valid;

  std::size_t rows() const { return query_ids.size(); }
  std::size_t cols() const { return candidate_ids.size(); }
  std::size_t at(std::size_t r, std::size_t c) const { return r * cols() + c; }
  bool is_valid(std::size_t r, std::size_t c) const { return valid[at(r, c)] != 0; }
  // Score of one cell under a mode; throws kMissingModality if absent.
  double score(std::size_t r, std::size_t c, ScoreMode mode, const FusionParams& p) const;

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;
};

// OpenMP over query rows; every row is computed independently, so results
// do not depend on the worker count.
ScoreMatrix all_pairs_scores(const Dataset& ds, const ScoringConfig& cfg, Protocol protocol,
                             const DescriptorIndex* keypoint_index = nullptr,
                             Execution exec = Execution::kParallel);

// Serial reference: one single-class likelihood call per cell.
ScoreMatrix all_pairs_scores_reference(const Dataset& ds, const ScoringConfig& cfg,
                                       Protocol protocol,
                                       const DescriptorIndex* keypoint_index = nullptr);

enum class PairScoring { kSymmetrized, kDirected };

// Pairs labeled positive iff both subjects share a family. Symmetrized:
// one score per unordered pair, the mean of the two directed scores.
RocCurve family_roc(const ScoreMatrix& sm, const Dataset& ds, ScoreMode mode,
                    const FusionParams& p, PairScoring pairing = PairScoring::kSymmetrized);

// Per-subject score = score(first group) - score(second group) with groups
// in sorted order; the first group is the positive class.
RocCurve group_roc(const ScoreMatrix& sm, const Dataset& ds, ScoreMode mode,
                   const FusionParams& p);

RocCurve evaluate(const ScoreMatrix& sm, const Dataset& ds, ScoreMode mode,
                  const FusionParams& p);

struct AlphaSweep {
  std::vector<std::pair<double, double>> points;  // (alpha, auc)
  double best_alpha = 0.0;
  double best_auc = 0.0;
};

AlphaSweep alpha_sweep(const ScoreMatrix& sm, const Dataset& ds, double grid_step);
AlphaSweep alpha_sweep(const Dataset& ds, const ScoringConfig& cfg, double grid_step,
                       Protocol protocol);

// Pearson correlation of shallow vs deep over valid cells.
double independence_diagnostic(const ScoreMatrix& sm);

struct CalibrationSplit {
  Dataset calibration;
  Dataset evaluation;
};

// Whole families go to one side; round(fraction * families) calibrate.
CalibrationSplit split_calibration(const Dataset& ds, double fraction, std::uint64_t seed);

}  // namespace memdex
