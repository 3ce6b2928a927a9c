#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "memdex/deep.hpp"
#include "memdex/error.hpp"
#include "test_support.hpp"

namespace memdex {
namespace {

struct Corpus {
  std::vector<DeepVector> vectors;
  std::vector<std::string> labels;
  std::vector<std::string> ids;
  std::vector<oracle::TrainingPoint> oracle_points;

  DeepTrainingSet set() const { return DeepTrainingSet(vectors, labels, ids); }
};

Corpus random_corpus(std::mt19937_64& rng, std::size_t n, std::size_t dim, std::size_t classes,
                     bool binary) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (double& x : v) x = binary ? (coin(rng) ? 1.0 : 0.0) : normal(rng);
    c.vectors.push_back(DeepVector::from_values(v, binary));
    c.labels.push_back("C" + std::to_string(i % classes));
    c.ids.push_back("S" + std::to_string(i));
    c.oracle_points.push_back({v, c.labels.back(), c.ids.back()});
  }
  return c;
}

TEST(Deep, SoleIdenticalVectorGivesLog2) {
  const auto v = DeepVector::real({1.0, 2.0, 3.0});
  DeepTrainingSet t({v}, {"A"}, {"S1"});
  DeepScoreConfig cfg;
  EXPECT_EQ(deep_log_likelihood(v, t, "A", cfg), std::log(2.0));
  EXPECT_NEAR(deep_log_likelihood(v, t, "A", cfg), 0.693147, 1e-6);
}

TEST(Deep, MissingClassStrictVsBatch) {
  const auto a = DeepVector::real({0.0, 0.0});
  const auto b = DeepVector::real({1.0, 0.0});
  DeepTrainingSet t({a, b}, {"A", "B"}, {"S1", "S2"});
  DeepScoreConfig cfg;
  const std::vector<std::string> classes{"A", "B", "Z"};
  // Excluding S2 leaves B without admissible vectors.
  const auto batch = batch_deep_scores(b, t, classes, cfg, "S2");
  EXPECT_EQ(batch.at("B"), 0.0);
  EXPECT_EQ(batch.at("Z"), 0.0);
  EXPECT_GT(batch.at("A"), 0.0);
  try {
    deep_log_likelihood(b, t, "B", cfg, "S2");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingEvidence);
  }
  EXPECT_THROW(deep_log_likelihood(b, t, "Z", cfg), Error);
}

TEST(Deep, ShapeErrors) {
  DeepTrainingSet t({DeepVector::real({0.0, 0.0})}, {"A"}, {"S1"});
  DeepScoreConfig cfg;
  try {
    deep_log_likelihood(DeepVector::real({0.0}), t, "A", cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  const std::uint8_t bits[] = {0, 1};
  try {
    deep_log_likelihood(DeepVector::binary(bits), t, "A", cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBinaryMismatch);
  }
}

TEST(Deep, RealMatchesOracle) {
  std::mt19937_64 rng(5);
  const auto c = random_corpus(rng, 30, 16, 2, false);
  const auto t = c.set();
  for (MuMode mode : {MuMode::kAllTraining, MuMode::kPerClass}) {
    DeepScoreConfig cfg;
    cfg.mu_mode = mode;
    for (std::size_t q = 0; q < c.vectors.size(); ++q) {
      for (const char* label : {"C0", "C1"}) {
        const double got = deep_log_likelihood(c.vectors[q], t, label, cfg, c.ids[q]);
        const double want = oracle::deep_loglik(c.oracle_points[q].descriptor, c.oracle_points, label, c.ids[q],
                                                mode == MuMode::kPerClass);
        EXPECT_TRUE(oracle::close_rel(got, want, 1e-12)) << got << " vs " << want;
      }
    }
  }
}

TEST(Deep, BinaryMatchesOracleAndHammingPermutation) {
  std::mt19937_64 rng(7);
  const auto c = random_corpus(rng, 24, 130, 3, true);
  const auto t = c.set();
  std::vector<std::size_t> perm(130);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<DeepVector> permuted;
  for (const auto& v : c.vectors) {
    std::vector<std::uint8_t> bits(130);
    for (std::size_t i = 0; i < 130; ++i) bits[i] = v.bit(perm[i]);
    permuted.push_back(DeepVector::binary(bits));
  }
  DeepTrainingSet tp(permuted, c.labels, c.ids);
  DeepScoreConfig cfg;
  for (std::size_t q = 0; q < c.vectors.size(); ++q) {
    const double got = deep_log_likelihood(c.vectors[q], t, "C1", cfg, c.ids[q]);
    const double want = oracle::deep_loglik(c.oracle_points[q].descriptor, c.oracle_points, "C1", c.ids[q], false);
    EXPECT_TRUE(oracle::close_rel(got, want, 1e-12));
    EXPECT_EQ(got, deep_log_likelihood(permuted[q], tp, "C1", cfg, c.ids[q]));
  }
}

TEST(Deep, ScaleInvarianceAllTraining) {
  std::mt19937_64 rng(9);
  const auto c = random_corpus(rng, 20, 8, 2, false);
  std::vector<DeepVector> scaled;
  for (const auto& v : c.vectors) {
    auto vals = v.to_values();
    for (double& x : vals) x *= 3.7;
    scaled.push_back(DeepVector::real(vals));
  }
  const auto t = c.set();
  DeepTrainingSet ts(scaled, c.labels, c.ids);
  DeepScoreConfig cfg;
  for (std::size_t q = 0; q < c.vectors.size(); ++q) {
    const double a = deep_log_likelihood(c.vectors[q], t, "C0", cfg, c.ids[q]);
    const double b = deep_log_likelihood(scaled[q], ts, "C0", cfg, c.ids[q]);
    EXPECT_NEAR(a, b, 1e-12);
  }
}

TEST(Deep, NonNegativeAndSingleExemplarBound) {
  std::mt19937_64 rng(11);
  const auto c = random_corpus(rng, 15, 6, 15, false);  // one exemplar per class
  const auto t = c.set();
  DeepScoreConfig cfg;
  for (std::size_t q = 0; q < c.vectors.size(); ++q) {
    for (const auto& label : c.labels) {
      if (label == c.labels[q]) continue;
      const double s = deep_log_likelihood(c.vectors[q], t, label, cfg, c.ids[q]);
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, std::log(2.0));
    }
  }
}

TEST(Deep, BatchEqualsPerClassBitForBit) {
  std::mt19937_64 rng(13);
  const auto c = random_corpus(rng, 25, 10, 4, false);
  const auto t = c.set();
  const std::vector<std::string> classes{"C0", "C1", "C2", "C3"};
  for (MuMode mode : {MuMode::kAllTraining, MuMode::kPerClass}) {
    DeepScoreConfig cfg;
    cfg.mu_mode = mode;
    for (std::size_t q = 0; q < c.vectors.size(); ++q) {
      const auto batch = batch_deep_scores(c.vectors[q], t, classes, cfg, c.ids[q]);
      for (const auto& label : classes) {
        EXPECT_EQ(batch.at(label), deep_log_likelihood(c.vectors[q], t, label, cfg, c.ids[q]));
      }
      const std::vector<std::string> one{"C2"};
      EXPECT_EQ(batch_deep_scores(c.vectors[q], t, one, cfg, c.ids[q]).at("C2"), batch.at("C2"));
    }
  }
}

TEST(Deep, HammingDistance480Of1920) {
  std::vector<std::uint8_t> a(1920, 1), b(1920, 1);
  for (std::size_t i = 0; i < 480; ++i) b[1919 - i] = 0;
  const auto va = DeepVector::binary(a), vb = DeepVector::binary(b);
  EXPECT_EQ(squared_distance(va, vb), 480.0);
  DeepTrainingSet t({vb}, {"A"}, {"S1"});
  DeepScoreConfig cfg;
  // Only one training vector: mu = sqrt(480), kernel exp(-1).
  EXPECT_DOUBLE_EQ(deep_log_likelihood(va, t, "A", cfg), std::log1p(std::exp(-1.0)));
}

}  // namespace
}  // namespace memdex
