#include "memdex/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "memdex/error.hpp"

namespace memdex {

double fuse(double shallow, double deep, const FusionParams& p) {
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
  if (!std::isfinite(shallow) || !std::isfinite(deep)) {
    fail(ErrorCode::kNonFinite, "fusion inputs must be finite");
  }
  return p.alpha * shallow + (1.0 - p.alpha) * deep;
}

std::string_view to_string(Protocol p) { return p == Protocol::kFamily ? "family" : "group"; }

std::string_view to_string(ScoreMode m) {
  switch (m) {
    case ScoreMode::kShallow: return "shallow";
    case ScoreMode::kDeep: return "deep";
    case ScoreMode::kFused: return "fused";
  }
  return "fused";
}

double ScoreMatrix::score(std::size_t r, std::size_t c, ScoreMode mode,
                          const FusionParams& p) const {
  const std::size_t i = at(r, c);
  switch (mode) {
    case ScoreMode::kShallow:
      if (!has_shallow) fail(ErrorCode::kMissingModality, "score matrix has no shallow scores");
      return shallow[i];
    case ScoreMode::kDeep:
      if (!has_deep) fail(ErrorCode::kMissingModality, "score matrix has no deep scores");
      return deep[i];
    case ScoreMode::kFused:
      if (!has_shallow || !has_deep) {
        fail(ErrorCode::kMissingModality, "fused scores need both shallow and deep scores");
      }
      return fuse(shallow[i], deep[i], p);
  }
  return 0.0;
}

namespace {

bool needs_shallow(ScoreMode m) { return m != ScoreMode::kDeep; }
bool needs_deep(ScoreMode m) { return m != ScoreMode::kShallow; }

LabelKind class_kind(Protocol protocol) {
  return protocol == Protocol::kFamily ? LabelKind::kSubject : LabelKind::kGroup;
}

// Shared setup of both drivers: validation, candidate list, keypoint index and
// the deep vectors in the representation they will be scored in.
struct ScoringPlan {
  const Dataset* ds = nullptr;
  Protocol protocol = Protocol::kFamily;
  ScoringConfig cfg;
  std::vector<std::string> candidates;
  std::optional<DescriptorIndex> owned_index;
  const DescriptorIndex* external_index = nullptr;

  const DescriptorIndex& index() const { return owned_index ? *owned_index : *external_index; }
  // Family protocol or fixed-table group protocol: one training set for all.
  std::optional<DeepTrainingSet> shared_training;
  std::vector<DeepVector> query_vectors;
  bool per_fold_binarization = false;
};

ScoringPlan make_plan(const Dataset& ds, const ScoringConfig& cfg, Protocol protocol,
                      const DescriptorIndex* keypoint_index) {
  ScoringPlan plan;
  plan.ds = &ds;
  plan.protocol = protocol;
  plan.cfg = cfg;
  if (!(cfg.fusion.alpha >= 0.0 && cfg.fusion.alpha <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
  if (ds.size() < 2) fail(ErrorCode::kInvalidArgument, "all-pairs scoring needs at least 2 subjects");
  if (protocol == Protocol::kFamily) {
    for (const auto& s : ds.subjects()) plan.candidates.push_back(s.subject_id);
  } else {
    plan.candidates = ds.labels(LabelKind::kGroup);
  }

  if (needs_shallow(cfg.mode)) {
    if (keypoint_index) {
      if (keypoint_index->owners().size() != ds.size() || keypoint_index->dim() != ds.d_kp()) {
        fail(ErrorCode::kInvalidArgument, "prebuilt index does not match the dataset");
      }
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& o = keypoint_index->owners()[i];
        const auto& s = ds.at(i);
        if (o.subject_id != s.subject_id || o.instance_label != s.instance_label ||
            o.group_label != s.group_label) {
          fail(ErrorCode::kInvalidArgument,
               "prebuilt index subject table differs from dataset at subject " + s.subject_id);
        }
      }
      plan.external_index = keypoint_index;
    } else {
      plan.owned_index.emplace(
          DescriptorIndex::build(ds, FeatureKind::kKeypoints, cfg.index_mode, cfg.approx));
    }
  }

  if (needs_deep(cfg.mode)) {
    for (const auto& s : ds.subjects()) {
      if (!s.deep_vector) {
        fail(ErrorCode::kMissingModality,
             "subject " + s.subject_id + " has no deep vector but " +
                 std::string(to_string(cfg.mode)) + " scoring needs one");
      }
    }
    if (cfg.binarized && !cfg.thresholds && protocol == Protocol::kFamily) {
      fail(ErrorCode::kInvalidArgument,
           "binarized family scoring needs a threshold table fitted on a disjoint calibration set");
    }
    plan.per_fold_binarization = cfg.binarized && !cfg.thresholds;
    if (!plan.per_fold_binarization) {
      std::vector<DeepVector> vectors;
      std::vector<std::string> labels, ids;
      for (const auto& s : ds.subjects()) {
        vectors.push_back(cfg.binarized ? apply_thresholds(*s.deep_vector, *cfg.thresholds)
                                        : *s.deep_vector);
        labels.push_back(label_of(s, class_kind(protocol)));
        ids.push_back(s.subject_id);
      }
      plan.query_vectors = vectors;
      plan.shared_training.emplace(std::move(vectors), std::move(labels), std::move(ids));
    }
  }
  return plan;
}

ScoreMatrix empty_matrix(const ScoringPlan& plan) {
  ScoreMatrix sm;
  sm.protocol = plan.protocol;
  for (const auto& s : plan.ds->subjects()) sm.query_ids.push_back(s.subject_id);
  sm.candidate_ids = plan.candidates;
  sm.has_shallow = needs_shallow(plan.cfg.mode);
  sm.has_deep = needs_deep(plan.cfg.mode);
  sm.alpha = plan.cfg.fusion.alpha;
  const std::size_t cells = sm.rows() * sm.cols();
  sm.shallow.assign(cells, 0.0);
  sm.deep.assign(cells, 0.0);
  sm.valid.assign(cells, 1);
  if (plan.protocol == Protocol::kFamily) {
    for (std::size_t r = 0; r < sm.rows(); ++r) sm.valid[sm.at(r, r)] = 0;
  }
  return sm;
}

// Training set of one leave-one-subject-out fold with thresholds refit on it.
struct Fold {
  DeepTrainingSet training;
  DeepVector query;
};

Fold binarized_fold(const ScoringPlan& plan, std::size_t q) {
  const Dataset& ds = *plan.ds;
  const DatasetView rest = leave_subject_out(ds, ds.at(q).subject_id);
  const ThresholdTable table = fit_thresholds(rest, LabelKind::kGroup, Execution::kSerial);
  std::vector<DeepVector> vectors;
  std::vector<std::string> labels, ids;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const SubjectRecord& s = rest.subject(i);
    vectors.push_back(apply_thresholds(*s.deep_vector, table));
    labels.push_back(s.group_label);
    ids.push_back(s.subject_id);
  }
  return {DeepTrainingSet(std::move(vectors), std::move(labels), std::move(ids)),
          apply_thresholds(*ds.at(q).deep_vector, table)};
}

void score_row(const ScoringPlan& plan, std::size_t q, ScoreMatrix& sm) {
  const Dataset& ds = *plan.ds;
  const SubjectRecord& query = ds.at(q);
  const LabelKind kind = class_kind(plan.protocol);
  const std::size_t cols = sm.cols();

  if (sm.has_shallow) {
    const DescriptorIndex& idx = plan.index();
    std::vector<std::uint32_t> ids;
    std::vector<std::size_t> cols_with_class;
    for (std::size_t c = 0; c < cols; ++c) {
      if (auto cls = idx.find_class(plan.candidates[c], kind)) {
        ids.push_back(*cls);
        cols_with_class.push_back(c);
      }
    }
    std::uint32_t excluded = DescriptorIndex::kNoOwner;
    if (plan.cfg.shallow.exclude_self_subject) {
      excluded = idx.find_owner(query.subject_id).value_or(DescriptorIndex::kNoOwner);
    }
    const auto scores = shallow_scores_dense(query.keypoints, idx, ids, kind, plan.cfg.shallow,
                                             excluded, Execution::kSerial);
    for (std::size_t i = 0; i < ids.size(); ++i) sm.shallow[sm.at(q, cols_with_class[i])] = scores[i];
  }

  if (sm.has_deep) {
    std::optional<Fold> fold;
    const DeepTrainingSet* training = nullptr;
    const DeepVector* qv = nullptr;
    std::size_t excluded = kNoExclusion;
    if (plan.per_fold_binarization) {
      fold.emplace(binarized_fold(plan, q));
      training = &fold->training;
      qv = &fold->query;
    } else {
      training = &*plan.shared_training;
      qv = &plan.query_vectors[q];
      if (plan.cfg.deep.exclude_self_subject) excluded = q;
    }
    std::vector<std::uint32_t> ids;
    std::vector<std::size_t> cols_with_class;
    for (std::size_t c = 0; c < cols; ++c) {
      if (auto cls = training->find_class(plan.candidates[c])) {
        ids.push_back(*cls);
        cols_with_class.push_back(c);
      }
    }
    const auto scores = deep_scores_dense(*qv, *training, ids, plan.cfg.deep, excluded, false);
    for (std::size_t i = 0; i < ids.size(); ++i) sm.deep[sm.at(q, cols_with_class[i])] = scores[i];
  }
}

}  // namespace

ScoreMatrix all_pairs_scores(const Dataset& ds, const ScoringConfig& cfg, Protocol protocol,
                             const DescriptorIndex* keypoint_index, Execution exec) {
  const ScoringPlan plan = make_plan(ds, cfg, protocol, keypoint_index);
  ScoreMatrix sm = empty_matrix(plan);
  const auto n = static_cast<std::int64_t>(ds.size());
  if (exec == Execution::kParallel) {
    // Rows write disjoint slices of the matrix.
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t q = 0; q < n; ++q) score_row(plan, static_cast<std::size_t>(q), sm);
  } else {
    for (std::int64_t q = 0; q < n; ++q) score_row(plan, static_cast<std::size_t>(q), sm);
  }
  return sm;
}

ScoreMatrix all_pairs_scores_reference(const Dataset& ds, const ScoringConfig& cfg,
                                       Protocol protocol, const DescriptorIndex* keypoint_index) {
  const ScoringPlan plan = make_plan(ds, cfg, protocol, keypoint_index);
  ScoreMatrix sm = empty_matrix(plan);
  const LabelKind kind = class_kind(protocol);
  for (std::size_t q = 0; q < ds.size(); ++q) {
    const SubjectRecord& query = ds.at(q);
    std::optional<Fold> fold;
    if (sm.has_deep && plan.per_fold_binarization) fold.emplace(binarized_fold(plan, q));
    for (std::size_t c = 0; c < sm.cols(); ++c) {
      const std::string& cand = plan.candidates[c];
      if (sm.has_shallow) {
        sm.shallow[sm.at(q, c)] = keypoint_log_likelihood(query.keypoints, plan.index(), cand, kind,
                                                          cfg.shallow, query.subject_id);
      }
      if (sm.has_deep) {
        const std::string one[] = {cand};
        const auto scores =
            fold ? batch_deep_scores(fold->query, fold->training, one, cfg.deep, query.subject_id)
                 : batch_deep_scores(plan.query_vectors[q], *plan.shared_training, one, cfg.deep,
                                     query.subject_id);
        sm.deep[sm.at(q, c)] = scores.at(cand);
      }
    }
  }
  return sm;
}

namespace {

std::map<std::string, const SubjectRecord*> subject_lookup(const Dataset& ds) {
  std::map<std::string, const SubjectRecord*> out;
  for (const auto& s : ds.subjects()) out[s.subject_id] = &s;
  return out;
}

const SubjectRecord& lookup(const std::map<std::string, const SubjectRecord*>& m,
                            const std::string& id) {
  auto it = m.find(id);
  if (it == m.end()) fail(ErrorCode::kUnknownSubject, "score matrix subject " + id + " not in dataset");
  return *it->second;
}

}  // namespace

RocCurve family_roc(const ScoreMatrix& sm, const Dataset& ds, ScoreMode mode,
                    const FusionParams& p, PairScoring pairing) {
  if (sm.protocol != Protocol::kFamily) {
    fail(ErrorCode::kInvalidArgument, "family ROC needs a family-protocol score matrix");
  }
  const auto subjects = subject_lookup(ds);
  std::map<std::string, std::size_t> col_of;
  for (std::size_t c = 0; c < sm.cols(); ++c) col_of[sm.candidate_ids[c]] = c;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (std::size_t r = 0; r < sm.rows(); ++r) {
    const SubjectRecord& a = lookup(subjects, sm.query_ids[r]);
    for (std::size_t r2 = 0; r2 < sm.rows(); ++r2) {
      if (r2 == r) continue;
      if (pairing == PairScoring::kSymmetrized && r2 < r) continue;
      auto c_ab = col_of.find(sm.query_ids[r2]);
      if (c_ab == col_of.end() || !sm.is_valid(r, c_ab->second)) continue;
      const SubjectRecord& b = lookup(subjects, sm.query_ids[r2]);
      double s = sm.score(r, c_ab->second, mode, p);
      if (pairing == PairScoring::kSymmetrized) {
        auto c_ba = col_of.find(sm.query_ids[r]);
        if (c_ba == col_of.end() || !sm.is_valid(r2, c_ba->second)) continue;
        s = (s + sm.score(r2, c_ba->second, mode, p)) / 2.0;
      }
      scores.push_back(s);
      labels.push_back(a.instance_label == b.instance_label);
    }
  }
  if (std::find(labels.begin(), labels.end(), 1) == labels.end()) {
    fail(ErrorCode::kDegenerate, "no positive pairs: every family has a single scored member");
  }
  return roc_auc(scores, labels);
}

RocCurve group_roc(const ScoreMatrix& sm, const Dataset& ds, ScoreMode mode,
                   const FusionParams& p) {
  if (sm.protocol != Protocol::kGroup) {
    fail(ErrorCode::kInvalidArgument, "group ROC needs a group-protocol score matrix");
  }
  const auto groups = ds.labels(LabelKind::kGroup);
  if (groups.size() != 2 || sm.cols() != 2 || sm.candidate_ids != groups) {
    fail(ErrorCode::kInvalidArgument, "group ROC needs exactly two group labels, found " +
                                          std::to_string(groups.size()));
  }
  const auto subjects = subject_lookup(ds);
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (std::size_t r = 0; r < sm.rows(); ++r) {
    if (!sm.is_valid(r, 0) || !sm.is_valid(r, 1)) continue;
    const SubjectRecord& s = lookup(subjects, sm.query_ids[r]);
    scores.push_back(sm.score(r, 0, mode, p) - sm.score(r, 1, mode, p));
    labels.push_back(s.group_label == groups[0]);
  }
  return roc_auc(scores, labels);
}

RocCurve evaluate(const ScoreMatrix& sm, const Dataset& ds, ScoreMode mode,
                  const FusionParams& p) {
  return sm.protocol == Protocol::kFamily ? family_roc(sm, ds, mode, p) : group_roc(sm, ds, mode, p);
}

AlphaSweep alpha_sweep(const ScoreMatrix& sm, const Dataset& ds, double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "grid step must lie in (0, 1]");
  }
  const double steps = std::round(1.0 / grid_step);
  if (std::abs(steps * grid_step - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidArgument, "grid step must divide 1 evenly");
  }
  const auto n = static_cast<std::size_t>(steps);
  AlphaSweep sweep;
  for (std::size_t i = 0; i <= n; ++i) {
    const double alpha = static_cast<double>(i) / static_cast<double>(n);
    const double auc = evaluate(sm, ds, ScoreMode::kFused, {alpha}).auc;
    sweep.points.emplace_back(alpha, auc);
    if (i == 0 || auc > sweep.best_auc) {
      sweep.best_alpha = alpha;
      sweep.best_auc = auc;
    }
  }
  return sweep;
}

AlphaSweep alpha_sweep(const Dataset& ds, const ScoringConfig& cfg, double grid_step,
                       Protocol protocol) {
  ScoringConfig fused = cfg;
  fused.mode = ScoreMode::kFused;
  return alpha_sweep(all_pairs_scores(ds, fused, protocol), ds, grid_step);
}

double independence_diagnostic(const ScoreMatrix& sm) {
  if (!sm.has_shallow || !sm.has_deep) {
    fail(ErrorCode::kMissingModality, "independence diagnostic needs both modalities");
  }
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < sm.valid.size(); ++i) {
    if (sm.valid[i]) cells.push_back(i);
  }
  if (cells.size() < 3) fail(ErrorCode::kDegenerate, "need at least 3 valid cells");
  double mean_s = 0.0, mean_d = 0.0;
  for (std::size_t i : cells) {
    mean_s += sm.shallow[i];
    mean_d += sm.deep[i];
  }
  mean_s /= static_cast<double>(cells.size());
  mean_d /= static_cast<double>(cells.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i : cells) {
    const double x = sm.shallow[i] - mean_s;
    const double y = sm.deep[i] - mean_d;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorCode::kDegenerate, "zero variance in one modality");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CalibrationSplit split_calibration(const Dataset& ds, double fraction, std::uint64_t seed) {
  auto families = ds.labels(LabelKind::kInstance);
  if (families.size() < 2) fail(ErrorCode::kInvalidArgument, "calibration split needs 2+ families");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "calibration fraction must lie in (0, 1)");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(families.begin(), families.end(), rng);
  auto n_cal = static_cast<std::size_t>(std::round(fraction * static_cast<double>(families.size())));
  n_cal = std::clamp<std::size_t>(n_cal, 1, families.size() - 1);
  std::vector<std::string> cal(families.begin(), families.begin() + static_cast<std::ptrdiff_t>(n_cal));
  std::sort(cal.begin(), cal.end());
  std::vector<SubjectRecord> a, b;
  for (const auto& s : ds.subjects()) {
    (std::binary_search(cal.begin(), cal.end(), s.instance_label) ? a : b).push_back(s);
  }
  return {Dataset(std::move(a), ds.d_kp(), ds.d_dv()), Dataset(std::move(b), ds.d_kp(), ds.d_dv())};
}

}  // namespace memdex
