#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "memdex/dataset.hpp"
#include "memdex/parallel.hpp"

namespace memdex {

// Per-element binarization thresholds and the information gain (bits) each
// achieved on its training data.
struct ThresholdTable {
  std::vector<double> taus;
  std::vector<double> gains;
  std::vector<std::uint8_t> degenerate;

  std::size_t dim() const { return taus.size(); }
  friend bool operator==(const ThresholdTable&, const ThresholdTable&) = default;
};

// Gains closer than this are treated as equal; the smallest threshold wins.
inline constexpr double kGainTieTolerance = 1e-12;

// Shannon entropy in bits of the empirical distribution given by counts.
double entropy_bits(std::span<const std::size_t> counts);

struct ElementFit {
  double tau = 0.0;
  double gain = 0.0;
  bool degenerate = false;
};

// Fits one element: candidates are midpoints between consecutive distinct
// sorted values; the candidate maximizing H(b) - H(b|C) is kept.
ElementFit fit_element(std::span<const double> values, std::span<const std::uint32_t> classes,
                       std::size_t n_classes);

ThresholdTable fit_thresholds(std::span<const DeepVector> training,
                              std::span<const std::string> labels,
                              Execution exec = Execution::kParallel);

// Bit i is set iff v[i] > taus[i].
DeepVector apply_thresholds(const DeepVector& v, const ThresholdTable& table);

// Binarizes the deep vector of every subject that has one.
Dataset binarize_dataset(const Dataset& ds, const ThresholdTable& table);

// Fits on the subjects of a view using the given label kind as the class.
ThresholdTable fit_thresholds(const DatasetView& view, LabelKind kind,
                              Execution exec = Execution::kParallel);

}  // namespace memdex
