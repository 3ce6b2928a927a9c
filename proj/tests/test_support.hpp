#pragma once

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "memdex/dataset.hpp"
#include "oracles.hpp"

namespace memdex::testing {

struct RandomCorpusSpec {
  std::size_t subjects = 10;
  std::size_t max_keypoints = 20;
  std::size_t d_kp = 8;
  std::size_t d_dv = 6;
  std::size_t families = 4;
  bool vectors = true;
};

inline Dataset random_dataset(std::mt19937_64& rng, const RandomCorpusSpec& corpus_cfg) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> kp_count(1, corpus_cfg.max_keypoints);
  std::uniform_int_distribution<std::size_t> family(0, corpus_cfg.families - 1);
  std::vector<SubjectRecord> subjects;
  for (std::size_t s = 0; s < corpus_cfg.subjects; ++s) {
    SubjectRecord r;
    r.subject_id = "S" + std::to_string(100 + s);
    r.instance_label = "F" + std::to_string(family(rng));
    r.group_label = s % 2 ? "M" : "F";
    const std::size_t n = kp_count(rng);
    for (std::size_t k = 0; k < n; ++k) {
      Keypoint kp;
      kp.position = {normal(rng), normal(rng), normal(rng)};
      kp.scale = 1.0;
      kp.descriptor.resize(corpus_cfg.d_kp);
      for (double& x : kp.descriptor) x = normal(rng);
      r.keypoints.push_back(std::move(kp));
    }
    if (corpus_cfg.vectors) {
      std::vector<double> v(corpus_cfg.d_dv);
      for (double& x : v) x = normal(rng);
      r.deep_vector = DeepVector::real(std::move(v));
    }
    subjects.push_back(std::move(r));
  }
  return Dataset(std::move(subjects), corpus_cfg.d_kp, corpus_cfg.vectors ? corpus_cfg.d_dv : 0);
}

inline std::vector<oracle::TrainingPoint> keypoint_training(const Dataset& ds, LabelKind kind) {
  std::vector<oracle::TrainingPoint> out;
  for (const auto& s : ds.subjects()) {
    for (const auto& kp : s.keypoints) out.push_back({kp.descriptor, label_of(s, kind), s.subject_id});
  }
  return out;
}

inline std::vector<std::vector<double>> descriptors(const SubjectRecord& s) {
  std::vector<std::vector<double>> out;
  for (const auto& kp : s.keypoints) out.push_back(kp.descriptor);
  return out;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::string out;
  if (FILE* f = std::fopen(p.c_str(), "rb")) {
    char buf[65536];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    std::fclose(f);
  }
  return out;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("memdex_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace memdex::testing
