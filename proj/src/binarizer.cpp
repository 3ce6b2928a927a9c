#include "memdex/binarizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "memdex/error.hpp"

namespace memdex {

namespace {

double plogp_sum(std::size_t a, std::size_t b) {
  const std::size_t counts[] = {a, b};
  return entropy_bits(counts);
}

}  // namespace

double entropy_bits(std::span<const std::size_t> counts) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) fail(ErrorCode::kInvalidArgument, "entropy of all-zero counts is undefined");
  double h = 0.0;
  const double n = static_cast<double>(total);
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

ElementFit fit_element(std::span<const double> values, std::span<const std::uint32_t> classes,
                       std::size_t n_classes) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  if (values[order.front()] == values[order.back()]) {
    return {values[order.front()], 0.0, true};
  }

  std::vector<std::size_t> total(n_classes, 0);
  for (std::uint32_t c : classes) ++total[c];
  std::vector<std::size_t> below(n_classes, 0);

  struct Candidate {
    double tau;
    double gain;
  };
  std::vector<Candidate> candidates;
  for (std::size_t p = 0; p + 1 < n; ++p) {
    ++below[classes[order[p]]];
    const double lo = values[order[p]];
    const double hi = values[order[p + 1]];
    if (lo == hi) continue;
    const std::size_t n_below = p + 1;
    const double h_bit = plogp_sum(n_below, n - n_below);
    double h_cond = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (total[c] == 0) continue;
      h_cond += static_cast<double>(total[c]) / static_cast<double>(n) *
                plogp_sum(below[c], total[c] - below[c]);
    }
    candidates.push_back({(lo + hi) / 2.0, std::clamp(h_bit - h_cond, 0.0, 1.0)});
  }
  double best = 0.0;
  for (const auto& c : candidates) best = std::max(best, c.gain);
  // Candidates are in ascending tau order: the first within tolerance wins.
  for (const auto& c : candidates) {
    if (c.gain >= best - kGainTieTolerance) return {c.tau, c.gain, false};
  }
  return {candidates.front().tau, candidates.front().gain, false};
}

ThresholdTable fit_thresholds(std::span<const DeepVector> training,
                              std::span<const std::string> labels, Execution exec) {
  if (training.size() != labels.size()) {
    fail(ErrorCode::kInvalidArgument, "training vectors and labels differ in length");
  }
  if (training.size() < 2) {
    fail(ErrorCode::kInvalidArgument, "threshold fitting needs at least 2 training vectors");
  }
  const std::size_t dim = training.front().dim();
  for (const DeepVector& v : training) {
    if (v.is_binary()) fail(ErrorCode::kBinaryMismatch, "threshold fitting requires real-valued vectors");
    if (v.dim() != dim) fail(ErrorCode::kDimensionMismatch, "training vectors differ in dimension");
  }
  std::vector<std::string> names(labels.begin(), labels.end());
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<std::uint32_t> classes(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    classes[i] = static_cast<std::uint32_t>(
        std::lower_bound(names.begin(), names.end(), labels[i]) - names.begin());
  }

  ThresholdTable table;
  table.taus.resize(dim);
  table.gains.resize(dim);
  table.degenerate.resize(dim);
  auto fit_one = [&](std::size_t e, std::vector<double>& column) {
    for (std::size_t i = 0; i < training.size(); ++i) column[i] = training[i].values()[e];
    const ElementFit fit = fit_element(column, classes, names.size());
    table.taus[e] = fit.tau;
    table.gains[e] = fit.gain;
    table.degenerate[e] = fit.degenerate;
  };

  const auto n_elems = static_cast<std::int64_t>(dim);
  if (exec == Execution::kParallel) {
#pragma omp parallel
    {
      std::vector<double> column(training.size());
#pragma omp for schedule(static)
      for (std::int64_t e = 0; e < n_elems; ++e) fit_one(static_cast<std::size_t>(e), column);
    }
  } else {
    std::vector<double> column(training.size());
    for (std::int64_t e = 0; e < n_elems; ++e) fit_one(static_cast<std::size_t>(e), column);
  }
  return table;
}

ThresholdTable fit_thresholds(const DatasetView& view, LabelKind kind, Execution exec) {
  std::vector<DeepVector> vectors;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < view.size(); ++i) {
    const SubjectRecord& s = view.subject(i);
    if (!s.deep_vector) continue;
    vectors.push_back(*s.deep_vector);
    labels.push_back(label_of(s, kind));
  }
  return fit_thresholds(vectors, labels, exec);
}

DeepVector apply_thresholds(const DeepVector& v, const ThresholdTable& table) {
  if (v.is_binary()) fail(ErrorCode::kBinaryMismatch, "vector is already binary");
  if (v.dim() != table.dim()) {
    fail(ErrorCode::kDimensionMismatch, "vector has dimension " + std::to_string(v.dim()) +
                                            ", threshold table has " +
                                            std::to_string(table.dim()));
  }
  std::vector<std::uint8_t> bits(v.dim());
  const auto values = v.values();
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = values[i] > table.taus[i];
  return DeepVector::binary(bits);
}

Dataset binarize_dataset(const Dataset& ds, const ThresholdTable& table) {
  std::vector<SubjectRecord> subjects(ds.subjects().begin(), ds.subjects().end());
  for (auto& s : subjects) {
    if (s.deep_vector) s.deep_vector = apply_thresholds(*s.deep_vector, table);
  }
  return Dataset(std::move(subjects), ds.d_kp(), ds.d_dv());
}

}  // namespace memdex
