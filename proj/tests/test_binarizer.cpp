#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "memdex/binarizer.hpp"
#include "memdex/error.hpp"
#include "test_support.hpp"

namespace memdex {
namespace {

std::vector<std::string> names(std::span<const int> labels) {
  std::vector<std::string> out;
  for (int l : labels) out.push_back("c" + std::to_string(l));
  return out;
}

ElementFit fit_column(const std::vector<double>& values, const std::vector<int>& labels) {
  std::vector<DeepVector> vs;
  for (double v : values) vs.push_back(DeepVector::real({v}));
  const auto t = fit_thresholds(vs, names(labels), Execution::kSerial);
  return {t.taus[0], t.gains[0], t.degenerate[0] != 0};
}

TEST(Entropy, Examples) {
  const std::size_t a[] = {1, 1}, b[] = {1, 0}, c[] = {3, 1};
  EXPECT_EQ(entropy_bits(a), 1.0);
  EXPECT_EQ(entropy_bits(b), 0.0);
  EXPECT_NEAR(entropy_bits(c), 0.811278, 1e-6);
  const std::size_t z[] = {0, 0};
  EXPECT_THROW(entropy_bits(z), Error);
}

TEST(Binarizer, SeparableBalancedPair) {
  const auto fit = fit_column({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1});
  EXPECT_EQ(fit.tau, 0.5);
  EXPECT_NEAR(fit.gain, 1.0, 1e-15);
  EXPECT_FALSE(fit.degenerate);
}

TEST(Binarizer, ConstantElementIsDegenerate) {
  const auto fit = fit_column({0.3, 0.3, 0.3}, {0, 1, 0});
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.gain, 0.0);
}

TEST(Binarizer, InputErrors) {
  const std::vector<std::string> one{"a"};
  const std::vector<DeepVector> single{DeepVector::real({1.0})};
  EXPECT_THROW(fit_thresholds(single, one), Error);
  const std::uint8_t bits[] = {1};
  const std::vector<DeepVector> bin{DeepVector::binary(bits), DeepVector::binary(bits)};
  const std::vector<std::string> two{"a", "b"};
  try {
    fit_thresholds(bin, two);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBinaryMismatch);
  }
}

TEST(Binarizer, ApplyStrictInequality) {
  ThresholdTable t{{0.5, 1.0, -2.0}, {1, 1, 1}, {0, 0, 0}};
  const auto b = apply_thresholds(DeepVector::real({0.5, 1.5, -1.0}), t);
  EXPECT_TRUE(b.is_binary());
  EXPECT_FALSE(b.bit(0));
  EXPECT_TRUE(b.bit(1));
  EXPECT_TRUE(b.bit(2));
  const auto ones = apply_thresholds(DeepVector::real({9, 9, 9}), t);
  EXPECT_TRUE(ones.bit(0) && ones.bit(1) && ones.bit(2));
  EXPECT_THROW(apply_thresholds(DeepVector::real({1.0}), t), Error);
  EXPECT_THROW(apply_thresholds(b, t), Error);
}

TEST(Binarizer, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 256)(rng);
    const int k = std::uniform_int_distribution<int>(1, 5)(rng);
    std::vector<double> values(n);
    std::vector<int> labels(n);
    // Coarse values make ties and repeated gains common.
    std::uniform_int_distribution<int> level(0, trial % 2 ? 7 : 1000);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = std::uniform_int_distribution<int>(0, k - 1)(rng);
      values[i] = level(rng) * 0.125 + labels[i] * 0.0625 * (trial % 3);
    }
    const auto got = fit_column(values, labels);
    const auto want = oracle::mi_threshold_scan(values, labels);
    EXPECT_EQ(got.degenerate, want.degenerate);
    EXPECT_EQ(got.tau, want.tau) << "trial " << trial;
    EXPECT_NEAR(got.gain, want.gain, 1e-12);
    EXPECT_GE(got.gain, 0.0);
    EXPECT_LE(got.gain, 1.0);
  }
}

TEST(Binarizer, OneSamplePerClassGivesMedianSplit) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {4u, 6u, 9u, 16u}) {
    std::vector<double> values(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = std::normal_distribution<double>(0, 1)(rng);
      labels[i] = static_cast<int>(i);
    }
    auto sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const auto fit = fit_column(values, labels);
    // Lower median for odd n: ties go to the smallest tau.
    const std::size_t m = n / 2 - 1;
    EXPECT_EQ(fit.tau, (sorted[m] + sorted[m + 1]) / 2.0);
    EXPECT_NEAR(fit.gain, oracle::entropy({m + 1, n - m - 1}), 1e-12);
  }
}

TEST(Binarizer, InvariantUnderMonotoneTransformRelabelAndOrder) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 40;
    std::vector<double> values(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = std::normal_distribution<double>(0, 1)(rng);
      labels[i] = std::uniform_int_distribution<int>(0, 3)(rng);
    }
    const auto base = fit_column(values, labels);

    auto cubic = [](double x) { return x * x * x + 2.0 * x + 1.0; };
    std::vector<double> transformed;
    for (double v : values) transformed.push_back(cubic(v));
    const auto tfit = fit_column(transformed, labels);
    EXPECT_NEAR(tfit.gain, base.gain, 1e-12);
    // The partition is the same: the transformed tau sits between the images
    // of the two values that straddle the original tau.
    double below = -INFINITY, above = INFINITY;
    for (double v : values) {
      if (v <= base.tau) below = std::max(below, v);
      else above = std::min(above, v);
    }
    EXPECT_EQ(tfit.tau, (cubic(below) + cubic(above)) / 2.0);

    std::vector<int> relabeled;
    for (int l : labels) relabeled.push_back((l * 3 + 1) % 4);
    const auto rfit = fit_column(values, relabeled);
    EXPECT_EQ(rfit.tau, base.tau);
    EXPECT_NEAR(rfit.gain, base.gain, 1e-15);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> v2;
    std::vector<int> l2;
    for (std::size_t i : order) {
      v2.push_back(values[i]);
      l2.push_back(labels[i]);
    }
    const auto ofit = fit_column(v2, l2);
    EXPECT_EQ(ofit.tau, base.tau);
    EXPECT_EQ(ofit.gain, base.gain);
  }
}

TEST(Binarizer, EntropyIdentityCrossCheck) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> joint(6);
    for (auto& c : joint) c = std::uniform_int_distribution<std::size_t>(0, 20)(rng);
    joint[0] += 1;
    // joint[b * 3 + c]
    const std::size_t b0 = joint[0] + joint[1] + joint[2], b1 = joint[3] + joint[4] + joint[5];
    const std::size_t n = b0 + b1;
    const std::size_t bits[] = {b0, b1};
    double h_cond = 0.0;
    std::vector<std::size_t> cls(3);
    for (int c = 0; c < 3; ++c) {
      cls[c] = joint[c] + joint[3 + c];
      if (cls[c] == 0) continue;
      const std::size_t split[] = {joint[c], joint[3 + c]};
      h_cond += static_cast<double>(cls[c]) / n * entropy_bits(split);
    }
    const double mi_lib = entropy_bits(bits) - h_cond;
    const double mi_oracle = oracle::entropy({b0, b1}) + oracle::entropy(cls) - oracle::entropy(joint);
    EXPECT_NEAR(mi_lib, mi_oracle, 1e-12);
  }
}

TEST(Binarizer, SerialAndParallelTablesIdentical) {
  std::mt19937_64 rng(3);
  std::vector<DeepVector> vs;
  std::vector<std::string> labels;
  for (int i = 0; i < 60; ++i) {
    std::vector<double> v(48);
    for (double& x : v) x = std::normal_distribution<double>(0, 1)(rng);
    vs.push_back(DeepVector::real(v));
    labels.push_back(i % 3 ? "a" : "b");
  }
  EXPECT_EQ(fit_thresholds(vs, labels, Execution::kSerial), fit_thresholds(vs, labels, Execution::kParallel));
}

}  // namespace
}  // namespace memdex
