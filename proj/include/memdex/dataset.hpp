#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memdex {

inline constexpr std::size_t kDefaultKeypointDim = 64;

// One shallow feature: location, scale and appearance descriptor.
struct Keypoint {
  std::array<double, 3> position{};
  double scale = 1.0;
  std::vector<double> descriptor;
};

// Fixed-length deep descriptor. Real vectors keep their values; binary
// vectors are packed one bit per element so distances reduce to popcounts.
class DeepVector {
 public:
  DeepVector() = default;

  static DeepVector real(std::vector<double> values);
  static DeepVector binary(std::span<const std::uint8_t> bits);
  // Validates finiteness and, when is_binary, that every entry is 0 or 1.
  static DeepVector from_values(std::vector<double> values, bool is_binary);

  std::size_t dim() const { return dim_; }
  bool is_binary() const { return binary_; }

  double operator[](std::size_t i) const;
  bool bit(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }

  std::span<const double> values() const { return values_; }
  std::span<const std::uint64_t> words() const { return words_; }
  std::vector<double> to_values() const;

  friend bool operator==(const DeepVector&, const DeepVector&) = default;

 private:
  std::size_t dim_ = 0;
  bool binary_ = false;
  std::vector<double> values_;
  std::vector<std::uint64_t> words_;
};

// Squared Euclidean distance; Hamming count for binary pairs.
double squared_distance(const DeepVector& a, const DeepVector& b);

struct SubjectRecord {
  std::string subject_id;
  std::string instance_label;  // family
  std::string group_label;     // e.g. sex
  std::vector<Keypoint> keypoints;
  std::optional<DeepVector> deep_vector;
};

// Which label plays the role of the class C_k.
enum class LabelKind { kSubject, kInstance, kGroup };

const std::string& label_of(const SubjectRecord& s, LabelKind kind);
std::string_view to_string(LabelKind kind);

// Immutable collection of subjects. Subject order is the canonical order
// for every deterministic reduction downstream.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<SubjectRecord> subjects, std::size_t d_kp, std::size_t d_dv);

  std::span<const SubjectRecord> subjects() const { return subjects_; }
  const SubjectRecord& at(std::size_t i) const { return subjects_.at(i); }
  std::size_t size() const { return subjects_.size(); }
  std::size_t d_kp() const { return d_kp_; }
  std::size_t d_dv() const { return d_dv_; }

  std::optional<std::size_t> find(std::string_view subject_id) const;
  std::size_t total_keypoints() const;
  bool all_have_vectors() const;

  // N_{k,f}: keypoints per class label.
  std::map<std::string, std::size_t> keypoint_counts(LabelKind kind) const;
  // N_{k,v}: deep vectors per class label.
  std::map<std::string, std::size_t> vector_counts(LabelKind kind) const;

  std::vector<std::string> labels(LabelKind kind) const;

 private:
  std::vector<SubjectRecord> subjects_;
  std::size_t d_kp_ = kDefaultKeypointDim;
  std::size_t d_dv_ = 0;
  std::map<std::string, std::size_t, std::less<>> id_lookup_;
};

// Non-owning subset of a Dataset in canonical order. Cheap to copy; never
// mutates the underlying Dataset, which must outlive the view.
class DatasetView {
 public:
  explicit DatasetView(const Dataset& ds);
  DatasetView(const Dataset& ds, std::vector<std::size_t> members);

  const Dataset& dataset() const { return *ds_; }
  std::span<const std::size_t> members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  const SubjectRecord& subject(std::size_t i) const {
    return ds_->at(members_[i]);
  }
  bool contains(std::string_view subject_id) const;

  std::size_t total_keypoints() const;
  std::map<std::string, std::size_t> keypoint_counts(LabelKind kind) const;
  std::map<std::string, std::size_t> vector_counts(LabelKind kind) const;

 private:
  const Dataset* ds_;
  std::vector<std::size_t> members_;
};

DatasetView leave_subject_out(const Dataset& ds, std::string_view subject_id);
DatasetView leave_subject_out(const DatasetView& view, std::string_view subject_id);

}  // namespace memdex
