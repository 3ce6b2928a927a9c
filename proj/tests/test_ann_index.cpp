#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "memdex/ann_index.hpp"
#include "memdex/error.hpp"
#include "memdex/synth.hpp"
#include "test_support.hpp"

namespace memdex {
namespace {

Dataset three_points() {
  std::vector<SubjectRecord> subs(2);
  subs[0].subject_id = "S01";
  subs[0].instance_label = "A";
  subs[0].group_label = "M";
  subs[1].subject_id = "S02";
  subs[1].instance_label = "B";
  subs[1].group_label = "F";
  Keypoint k;
  k.descriptor = {0.0, 0.0};
  subs[0].keypoints.push_back(k);
  k.descriptor = {1.0, 0.0};
  subs[0].keypoints.push_back(k);
  k.descriptor = {0.0, 3.0};
  subs[1].keypoints.push_back(k);
  return Dataset(std::move(subs), 2, 0);
}

TEST(DescriptorIndex, BuildsThreePoints) {
  const auto ds = three_points();
  const auto idx = DescriptorIndex::build(ds, FeatureKind::kKeypoints, SearchMode::kExact);
  EXPECT_EQ(idx.size(), 3u);
  EXPECT_EQ(idx.dim(), 2u);
  EXPECT_EQ(idx.class_point_count(*idx.find_class("A", LabelKind::kInstance), LabelKind::kInstance), 2u);
}

TEST(DescriptorIndex, EmptyIsAnError) {
  std::vector<SubjectRecord> subs(1);
  subs[0].subject_id = "S";
  subs[0].instance_label = "A";
  subs[0].group_label = "M";
  Dataset ds(std::move(subs), 2, 0);
  try {
    DescriptorIndex::build(ds, FeatureKind::kKeypoints, SearchMode::kExact);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyIndex);
  }
}

TEST(DescriptorIndex, KnnSelfAndExclusion) {
  const auto ds = three_points();
  const auto idx = DescriptorIndex::build(ds, FeatureKind::kKeypoints, SearchMode::kExact);
  const std::vector<double> q{0.0, 0.0};
  auto hits = idx.knn(q, 1);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].point_index, 0u);
  EXPECT_EQ(hits[0].distance, 0.0);
  EXPECT_EQ(hits[0].subject_id, "S01");
  hits = idx.knn(q, 1, "S01");
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].subject_id, "S02");
  EXPECT_EQ(hits[0].squared_distance, 9.0);
}

TEST(DescriptorIndex, QueryDimensionMismatch) {
  const auto ds = three_points();
  const auto idx = DescriptorIndex::build(ds, FeatureKind::kKeypoints, SearchMode::kExact);
  const std::vector<double> q{0.0, 0.0, 0.0};
  try {
    idx.knn(q, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(DescriptorIndex, ExactKnnMatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    testing::RandomCorpusSpec corpus_cfg;
    corpus_cfg.subjects = 8;
    corpus_cfg.d_kp = trial % 2 ? 4 : 9;
    corpus_cfg.vectors = false;
    const auto ds = testing::random_dataset(rng, corpus_cfg);
    const auto idx = DescriptorIndex::build(ds, FeatureKind::kKeypoints, SearchMode::kExact);
    const auto training = testing::keypoint_training(ds, LabelKind::kInstance);
    const auto query = testing::descriptors(ds.at(trial % ds.size()));
    for (const auto& q : query) {
      const auto oracle = oracle::sorted_distances(training, q, "");
      for (std::size_t k : {std::size_t{1}, std::size_t{5}, training.size()}) {
        const auto hits = idx.knn(q, k);
        ASSERT_EQ(hits.size(), std::min(k, training.size()));
        for (std::size_t i = 0; i < hits.size(); ++i) {
          EXPECT_EQ(hits[i].point_index, oracle[i].second);
          EXPECT_EQ(hits[i].squared_distance, oracle[i].first);
        }
      }
    }
  }
}

TEST(DescriptorIndex, ExclusionEqualsView) {
  std::mt19937_64 rng(5);
  testing::RandomCorpusSpec corpus_cfg;
  corpus_cfg.subjects = 12;
  corpus_cfg.vectors = false;
  const auto ds = testing::random_dataset(rng, corpus_cfg);
  const auto full = DescriptorIndex::build(ds, FeatureKind::kKeypoints, SearchMode::kExact);
  const std::string victim = ds.at(4).subject_id;
  const auto view = leave_subject_out(ds, victim);
  const auto reduced = DescriptorIndex::build(view, FeatureKind::kKeypoints, SearchMode::kExact);
  for (const auto& q : testing::descriptors(ds.at(4))) {
    const auto a = full.knn(q, 7, victim);
    const auto b = reduced.knn(q, 7);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].squared_distance, b[i].squared_distance);
      EXPECT_EQ(a[i].subject_id, b[i].subject_id);
    }
  }
}

TEST(DescriptorIndex, RangeKernelSingleAndUntruncated) {
  const auto ds = three_points();
  const auto idx = DescriptorIndex::build(ds, FeatureKind::kKeypoints, SearchMode::kExact);
  const std::vector<double> q{0.0, 1.0};
  auto m = idx.range_kernel_sums(q, 2.5, 1, LabelKind::kInstance);
  EXPECT_EQ(m.at("A"), std::exp(-1.0 / 2.5));
  EXPECT_EQ(m.at("B"), 0.0);

  std::mt19937_64 rng(9);
  testing::RandomCorpusSpec corpus_cfg;
  corpus_cfg.vectors = false;
  const auto rds = testing::random_dataset(rng, corpus_cfg);
  const auto ridx = DescriptorIndex::build(rds, FeatureKind::kKeypoints, SearchMode::kExact);
  const auto training = testing::keypoint_training(rds, LabelKind::kInstance);
  for (const auto& q2 : testing::descriptors(rds.at(0))) {
    const auto sums = ridx.range_kernel_sums(q2, 3.0, kAllNeighbors, LabelKind::kInstance);
    std::map<std::string, double> expect;
    for (const auto& t : training) expect[t.label] += std::exp(-oracle::sq_dist(q2, t.descriptor) / 3.0);
    for (const auto& [label, mass] : expect) {
      EXPECT_TRUE(oracle::close_rel(sums.at(label), mass, 1e-12)) << label;
    }
  }
}

TEST(DescriptorIndex, RangeKernelDecay) {
  const auto ds = three_points();
  const auto idx = DescriptorIndex::build(ds, FeatureKind::kKeypoints, SearchMode::kExact);
  const std::vector<double> far{100.0, 100.0};
  for (const auto& [label, mass] : idx.range_kernel_sums(far, 1.0, kAllNeighbors, LabelKind::kInstance)) {
    EXPECT_LT(mass, 1e-15) << label;
  }
}

TEST(DescriptorIndex, ApproximateBuildIsDeterministic) {
  const auto cloud = generate_descriptor_cloud(5000, 16, 21);
  const std::size_t n = cloud.points.size() / cloud.dim;
  auto make = [&] {
    return DescriptorIndex::from_points(cloud.points, cloud.dim, std::vector<std::uint32_t>(n, 0),
                                        {{"S", "F", "G"}}, SearchMode::kApproximate);
  };
  const auto a = make();
  const auto b = make();
  const auto queries = generate_descriptor_cloud(50, 16, 22);
  for (std::size_t q = 0; q < 50; ++q) {
    std::span<const double> query(queries.points.data() + q * 16, 16);
    EXPECT_EQ(a.nearest(query, 10), b.nearest(query, 10));
  }
}

TEST(DescriptorIndex, ApproximateRecallOnHeldOutQueries) {
  const std::size_t dim = 32, n = 20000, nq = 200;
  const auto cloud = generate_descriptor_cloud(n + nq, dim, 31);
  std::vector<double> points(cloud.points.begin(), cloud.points.begin() + n * dim);
  const auto idx = DescriptorIndex::from_points(std::move(points), dim, std::vector<std::uint32_t>(n, 0),
                                                {{"S", "F", "G"}}, SearchMode::kApproximate);
  std::size_t hits = 0;
  for (std::size_t q = 0; q < nq; ++q) {
    std::span<const double> query(cloud.points.data() + (n + q) * dim, dim);
    hits += idx.nearest(query, 1)[0].point == idx.nearest_exact(query, 1)[0].point;
  }
  EXPECT_GE(hits, 190u);
}

TEST(DescriptorIndex, SaveLoadRoundTrip) {
  const auto dir = testing::scratch_dir("index_roundtrip");
  std::mt19937_64 rng(4);
  testing::RandomCorpusSpec corpus_cfg;
  corpus_cfg.subjects = 15;
  corpus_cfg.vectors = false;
  const auto ds = testing::random_dataset(rng, corpus_cfg);
  const auto idx = DescriptorIndex::build(ds, FeatureKind::kKeypoints, SearchMode::kApproximate,
                                          {2, 4, 8, 99});
  idx.save(dir / "a.mdx");
  const auto loaded = DescriptorIndex::load(dir / "a.mdx");
  loaded.save(dir / "b.mdx");
  EXPECT_EQ(testing::slurp(dir / "a.mdx"), testing::slurp(dir / "b.mdx"));
  for (const auto& q : testing::descriptors(ds.at(3))) {
    EXPECT_EQ(idx.nearest(q, 5), loaded.nearest(q, 5));
  }
  {
    std::string bytes = testing::slurp(dir / "a.mdx");
    bytes.resize(bytes.size() / 2);
    FILE* f = std::fopen((dir / "c.mdx").c_str(), "wb");
    std::fwrite(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
    try {
      DescriptorIndex::load(dir / "c.mdx");
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse);
    }
  }
}

}  // namespace
}  // namespace memdex
