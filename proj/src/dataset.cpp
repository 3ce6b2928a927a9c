#include "memdex/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "memdex/error.hpp"

namespace memdex {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kMissingFile: return "missing-file";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kDuplicateId: return "duplicate-id";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kUnknownSubject: return "unknown-subject";
    case ErrorCode::kEmptyIndex: return "empty-index";
    case ErrorCode::kMissingModality: return "missing-modality";
    case ErrorCode::kMissingEvidence: return "missing-evidence";
    case ErrorCode::kBinaryMismatch: return "binary-mismatch";
    case ErrorCode::kDegenerate: return "degenerate";
  }
  return "unknown";
}

DeepVector DeepVector::real(std::vector<double> values) {
  return from_values(std::move(values), false);
}

DeepVector DeepVector::binary(std::span<const std::uint8_t> bits) {
  DeepVector v;
  v.dim_ = bits.size();
  v.binary_ = true;
  v.words_.assign((bits.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) fail(ErrorCode::kInvalidArgument, "binary vector entry is not 0 or 1");
    if (bits[i]) v.words_[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  return v;
}

DeepVector DeepVector::from_values(std::vector<double> values, bool is_binary) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(ErrorCode::kNonFinite, "non-finite deep vector entry at element " + std::to_string(i));
    }
  }
  if (is_binary) {
    std::vector<std::uint8_t> bits(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] != 0.0 && values[i] != 1.0) {
        fail(ErrorCode::kInvalidArgument,
             "binary vector entry " + std::to_string(i) + " is not 0 or 1");
      }
      bits[i] = values[i] == 1.0;
    }
    return binary(bits);
  }
  DeepVector v;
  v.dim_ = values.size();
  v.values_ = std::move(values);
  return v;
}

double DeepVector::operator[](std::size_t i) const {
  return binary_ ? (bit(i) ? 1.0 : 0.0) : values_[i];
}

std::vector<double> DeepVector::to_values() const {
  if (!binary_) return values_;
  std::vector<double> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = bit(i) ? 1.0 : 0.0;
  return out;
}

double squared_distance(const DeepVector& a, const DeepVector& b) {
  if (a.dim() != b.dim()) {
    fail(ErrorCode::kDimensionMismatch, "deep vector dimensions differ: " +
                                            std::to_string(a.dim()) + " vs " +
                                            std::to_string(b.dim()));
  }
  if (a.is_binary() != b.is_binary()) {
    fail(ErrorCode::kBinaryMismatch, "cannot compare binary and real-valued deep vectors");
  }
  if (a.is_binary()) {
    std::uint64_t count = 0;
    auto wa = a.words();
    auto wb = b.words();
    for (std::size_t w = 0; w < wa.size(); ++w) count += std::popcount(wa[w] ^ wb[w]);
    return static_cast<double>(count);
  }
  auto va = a.values();
  auto vb = b.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    sum += d * d;
  }
  return sum;
}

const std::string& label_of(const SubjectRecord& s, LabelKind kind) {
  switch (kind) {
    case LabelKind::kSubject: return s.subject_id;
    case LabelKind::kInstance: return s.instance_label;
    case LabelKind::kGroup: return s.group_label;
  }
  return s.subject_id;
}

std::string_view to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::kSubject: return "subject";
    case LabelKind::kInstance: return "family";
    case LabelKind::kGroup: return "group";
  }
  return "subject";
}

Dataset::Dataset(std::vector<SubjectRecord> subjects, std::size_t d_kp, std::size_t d_dv)
    : subjects_(std::move(subjects)), d_kp_(d_kp), d_dv_(d_dv) {
  if (d_kp_ == 0) fail(ErrorCode::kInvalidArgument, "keypoint dimension must be positive");
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    const auto& s = subjects_[i];
    if (s.subject_id.empty()) fail(ErrorCode::kInvalidArgument, "empty subject_id at row " + std::to_string(i));
    if (s.instance_label.empty() || s.group_label.empty()) {
      fail(ErrorCode::kInvalidArgument, "subject " + s.subject_id + ": empty family or group label");
    }
    if (!id_lookup_.emplace(s.subject_id, i).second) {
      fail(ErrorCode::kDuplicateId, "duplicate subject_id " + s.subject_id);
    }
    for (std::size_t k = 0; k < s.keypoints.size(); ++k) {
      const auto& kp = s.keypoints[k];
      const std::string where = "subject " + s.subject_id + " keypoint " + std::to_string(k);
      if (kp.descriptor.size() != d_kp_) {
        fail(ErrorCode::kDimensionMismatch, where + ": descriptor has " +
                                                std::to_string(kp.descriptor.size()) +
                                                " values, expected " + std::to_string(d_kp_));
      }
      if (!(kp.scale > 0.0) || !std::isfinite(kp.scale)) {
        fail(ErrorCode::kInvalidArgument, where + ": scale must be positive and finite");
      }
      for (double x : kp.position) {
        if (!std::isfinite(x)) fail(ErrorCode::kNonFinite, where + ": non-finite position");
      }
      for (double x : kp.descriptor) {
        if (!std::isfinite(x)) fail(ErrorCode::kNonFinite, where + ": non-finite descriptor value");
      }
    }
    if (s.deep_vector) {
      if (d_dv_ == 0) d_dv_ = s.deep_vector->dim();
      if (s.deep_vector->dim() != d_dv_) {
        fail(ErrorCode::kDimensionMismatch, "subject " + s.subject_id + ": deep vector has " +
                                                std::to_string(s.deep_vector->dim()) +
                                                " values, expected " + std::to_string(d_dv_));
      }
    }
  }
}

std::optional<std::size_t> Dataset::find(std::string_view subject_id) const {
  auto it = id_lookup_.find(subject_id);
  if (it == id_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dataset::total_keypoints() const {
  std::size_t n = 0;
  for (const auto& s : subjects_) n += s.keypoints.size();
  return n;
}

bool Dataset::all_have_vectors() const {
  return std::all_of(subjects_.begin(), subjects_.end(),
                     [](const SubjectRecord& s) { return s.deep_vector.has_value(); });
}

std::map<std::string, std::size_t> Dataset::keypoint_counts(LabelKind kind) const {
  return DatasetView(*this).keypoint_counts(kind);
}

std::map<std::string, std::size_t> Dataset::vector_counts(LabelKind kind) const {
  return DatasetView(*this).vector_counts(kind);
}

std::vector<std::string> Dataset::labels(LabelKind kind) const {
  std::vector<std::string> out;
  for (const auto& s : subjects_) out.push_back(label_of(s, kind));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DatasetView::DatasetView(const Dataset& ds) : ds_(&ds), members_(ds.size()) {
  for (std::size_t i = 0; i < members_.size(); ++i) members_[i] = i;
}

DatasetView::DatasetView(const Dataset& ds, std::vector<std::size_t> members)
    : ds_(&ds), members_(std::move(members)) {
  if (!std::is_sorted(members_.begin(), members_.end()) ||
      std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    fail(ErrorCode::kInvalidArgument, "view members must be strictly increasing");
  }
  if (!members_.empty() && members_.back() >= ds.size()) {
    fail(ErrorCode::kInvalidArgument, "view member out of range");
  }
}

bool DatasetView::contains(std::string_view subject_id) const {
  auto idx = ds_->find(subject_id);
  return idx && std::binary_search(members_.begin(), members_.end(), *idx);
}

std::size_t DatasetView::total_keypoints() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < size(); ++i) n += subject(i).keypoints.size();
  return n;
}

namespace {

// Every label of the underlying dataset appears, so excluded classes read 0.
std::map<std::string, std::size_t> zero_counts(const Dataset& ds, LabelKind kind) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : ds.subjects()) counts.emplace(label_of(s, kind), 0);
  return counts;
}

}  // namespace

std::map<std::string, std::size_t> DatasetView::keypoint_counts(LabelKind kind) const {
  auto counts = zero_counts(*ds_, kind);
  for (std::size_t i = 0; i < size(); ++i) {
    counts[label_of(subject(i), kind)] += subject(i).keypoints.size();
  }
  return counts;
}

std::map<std::string, std::size_t> DatasetView::vector_counts(LabelKind kind) const {
  auto counts = zero_counts(*ds_, kind);
  for (std::size_t i = 0; i < size(); ++i) {
    auto& c = counts[label_of(subject(i), kind)];
    if (subject(i).deep_vector) ++c;
  }
  return counts;
}

DatasetView leave_subject_out(const Dataset& ds, std::string_view subject_id) {
  return leave_subject_out(DatasetView(ds), subject_id);
}

DatasetView leave_subject_out(const DatasetView& view, std::string_view subject_id) {
  auto idx = view.dataset().find(subject_id);
  if (!idx || !view.contains(subject_id)) {
    fail(ErrorCode::kUnknownSubject, "unknown subject_id " + std::string(subject_id));
  }
  std::vector<std::size_t> members;
  members.reserve(view.size());
  for (std::size_t m : view.members()) {
    if (m != *idx) members.push_back(m);
  }
  return DatasetView(view.dataset(), std::move(members));
}

}  // namespace memdex
