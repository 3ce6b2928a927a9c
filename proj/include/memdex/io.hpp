#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memdex/binarizer.hpp"
#include "memdex/dataset.hpp"
#include "memdex/fusion.hpp"
#include "memdex/roc.hpp"

namespace memdex::io {

// Text formats. Reals are written with 17 significant digits so every value
// survives write -> read -> write unchanged.
//
// Manifest (CSV, paths relative to the manifest's directory):
//   # d_kp=<n>            optional, default 64
//   # d_dv=<n>            optional, inferred from vector files
//   subject_id,family_id,group_label,keypoint_file,vector_file
// Keypoint file:  "KEYPOINTS <count> <D_kp>" then "x y z scale d_1 .. d_D".
// Vector file:    "VECTORS <count> <D_dv> [binary]" then "<subject_id> v_1 .. v_D".
// Threshold file: "THRESHOLDS <D_dv>" then "<index> <tau> <gain_bits> <0|1>".

std::string format_real(double v);

// Writes via a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

Dataset load_dataset(const std::filesystem::path& manifest_path);

// Writes manifest.csv, keypoints/<subject>.kp and vectors.txt under dir.
// Returns the manifest path.
std::filesystem::path write_dataset(const Dataset& ds, const std::filesystem::path& dir);

std::vector<Keypoint> read_keypoints(const std::filesystem::path& path, std::size_t d_kp);
std::string format_keypoints(std::span<const Keypoint> kps, std::size_t d_kp);

struct VectorFile {
  std::size_t dim = 0;
  bool binary = false;
  std::vector<std::pair<std::string, DeepVector>> rows;
};
VectorFile read_vectors(const std::filesystem::path& path);
std::string format_vectors(const VectorFile& vf);

ThresholdTable read_thresholds(const std::filesystem::path& path);
std::string format_thresholds(const ThresholdTable& table);

// Score matrix CSV, preceded by "# protocol=<family|group> alpha=<a>".
// Absent modalities and invalid cells leave their score fields empty.
ScoreMatrix read_score_matrix(const std::filesystem::path& path);
std::string format_score_matrix(const ScoreMatrix& sm);

// "# auc=<v> pos=<n> neg=<m>" then "threshold,fpr,tpr"; the origin row has
// threshold "inf".
std::string format_roc(const RocCurve& roc);
RocCurve read_roc(const std::filesystem::path& path);

}  // namespace memdex::io
