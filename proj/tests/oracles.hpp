#pragma once

// Independent brute-force evaluators used as test oracles. Nothing here calls
// into the library's scoring, search or entropy code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace memdex::oracle {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

struct TrainingPoint {
  std::vector<double> descriptor;
  std::string label;
  std::string subject;
};

// All (distance^2, index) pairs sorted ascending, excluded subject dropped.
inline std::vector<std::pair<double, std::size_t>> sorted_distances(
    const std::vector<TrainingPoint>& training, const std::vector<double>& q,
    const std::string& excluded) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t j = 0; j < training.size(); ++j) {
    if (!excluded.empty() && training[j].subject == excluded) continue;
    all.emplace_back(sq_dist(q, training[j].descriptor), j);
  }
  std::sort(all.begin(), all.end());
  return all;
}

// sum_i log( (1/N_k) sum_j exp(-|f_i-f_j|^2/(1+dNN_i^2)) [C_j=C_k] + 1 ),
// evaluated as a plain double loop over every (i, j) pair.
inline double shallow_loglik(const std::vector<std::vector<double>>& query,
                             const std::vector<TrainingPoint>& training,
                             const std::string& target, const std::string& excluded) {
  std::size_t n_k = 0;
  for (const auto& t : training) {
    if (t.label == target && (excluded.empty() || t.subject != excluded)) ++n_k;
  }
  if (n_k == 0) return 0.0;
  double total = 0.0;
  for (const auto& f : query) {
    double dnn_sq = INFINITY;
    for (const auto& t : training) {
      if (!excluded.empty() && t.subject == excluded) continue;
      dnn_sq = std::min(dnn_sq, sq_dist(f, t.descriptor));
    }
    double mass = 0.0;
    for (const auto& t : training) {
      if (!excluded.empty() && t.subject == excluded) continue;
      if (t.label != target) continue;
      mass += std::exp(-sq_dist(f, t.descriptor) / (1.0 + dnn_sq));
    }
    total += std::log1p(mass / static_cast<double>(n_k));
  }
  return total;
}

// Deep-vector KDE with mu = mean distance over admissible vectors (all or
// target class only).
inline double deep_loglik(const std::vector<double>& q, const std::vector<TrainingPoint>& training,
                          const std::string& target, const std::string& excluded, bool per_class,
                          double mu_floor = 1e-12) {
  double dist_sum = 0.0;
  std::size_t dist_n = 0, n_k = 0;
  for (const auto& t : training) {
    if (!excluded.empty() && t.subject == excluded) continue;
    if (t.label == target) ++n_k;
    if (per_class && t.label != target) continue;
    dist_sum += std::sqrt(sq_dist(q, t.descriptor));
    ++dist_n;
  }
  if (n_k == 0) return 0.0;
  const double mu = std::max(mu_floor, dist_sum / static_cast<double>(dist_n));
  double mass = 0.0;
  for (const auto& t : training) {
    if (!excluded.empty() && t.subject == excluded) continue;
    if (t.label != target) continue;
    mass += std::exp(-sq_dist(q, t.descriptor) / (mu * mu));
  }
  return std::log1p(mass / static_cast<double>(n_k));
}

// Entropy in bits via natural logs.
inline double entropy(const std::vector<std::size_t>& counts) {
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h += -p * std::log(p) / std::log(2.0);
  }
  return h;
}

struct MiFit {
  double tau;
  double gain;
  bool degenerate;
};

// Exhaustive scan over midpoints; MI evaluated as H(b) + H(C) - H(b, C),
// a different identity from the conditional-entropy form.
inline MiFit mi_threshold_scan(const std::vector<double>& values,
                               const std::vector<int>& labels, double tie_tol = 1e-12) {
  std::vector<double> distinct = values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() == 1) return {distinct[0], 0.0, true};
  std::map<int, std::size_t> class_index;
  for (int l : labels) class_index.emplace(l, class_index.size());
  const std::size_t nc = class_index.size();

  std::vector<std::size_t> class_counts(nc, 0);
  for (int l : labels) ++class_counts[class_index[l]];
  const double h_c = entropy(class_counts);

  std::vector<std::pair<double, double>> candidates;
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    const double tau = (distinct[i] + distinct[i + 1]) / 2.0;
    std::vector<std::size_t> bits(2, 0), joint(2 * nc, 0);
    for (std::size_t s = 0; s < values.size(); ++s) {
      const int b = values[s] > tau ? 1 : 0;
      ++bits[b];
      ++joint[b * nc + class_index[labels[s]]];
    }
    candidates.emplace_back(tau, entropy(bits) + h_c - entropy(joint));
  }
  double best = -1.0;
  for (auto& c : candidates) best = std::max(best, c.second);
  for (auto& c : candidates) {
    if (c.second >= best - tie_tol) return {c.first, c.second, false};
  }
  return {candidates[0].first, candidates[0].second, false};
}

// Mann-Whitney: P(s+ > s-) + 0.5 P(s+ = s-) by counting all pairs.
inline double mann_whitney(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

inline bool close_rel(double a, double b, double rel) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace memdex::oracle
