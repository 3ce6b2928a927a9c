#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memdex/dataset.hpp"

namespace memdex {

enum class SearchMode : std::uint32_t { kExact = 0, kApproximate = 1 };
enum class FeatureKind { kKeypoints, kVectors };

// Sentinel for "no truncation": every admissible point participates.
inline constexpr std::size_t kAllNeighbors = std::numeric_limits<std::size_t>::max();

// Randomized KD-forest settings. A leaf check visits up to leaf_size points.
struct ApproxParams {
  std::uint32_t trees = 4;
  std::uint32_t leaf_size = 16;
  std::uint32_t max_checked_leaves = 256;
  std::uint64_t seed = 0x6d656d646578ULL;
};

// Subject-level metadata the index needs to label and exclude points.
struct OwnerInfo {
  std::string subject_id;
  std::string instance_label;
  std::string group_label;
};

struct NeighborHit {
  std::size_t point_index = 0;
  double distance = 0.0;
  double squared_distance = 0.0;
  std::size_t owner = 0;
  std::string_view subject_id;
  std::string_view instance_label;
  std::string_view group_label;
};

// Light-weight search result used on hot paths.
struct Candidate {
  double squared_distance;
  std::uint32_t point;

  friend bool operator<(const Candidate& a, const Candidate& b) {
    return a.squared_distance < b.squared_distance ||
           (a.squared_distance == b.squared_distance && a.point < b.point);
  }
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Nearest-neighbor index over a flat descriptor collection. Points keep the
// dataset's canonical order; the index is immutable once built and safe for
// unrestricted concurrent queries.
class DescriptorIndex {
 public:
  static constexpr std::uint32_t kNoOwner = std::numeric_limits<std::uint32_t>::max();

  static DescriptorIndex build(const DatasetView& view, FeatureKind which, SearchMode mode,
                               const ApproxParams& params = {});
  static DescriptorIndex build(const Dataset& ds, FeatureKind which, SearchMode mode,
                               const ApproxParams& params = {});
  // points is row-major count x dim; owner_of_point indexes into owners.
  static DescriptorIndex from_points(std::vector<double> points, std::size_t dim,
                                     std::vector<std::uint32_t> owner_of_point,
                                     std::vector<OwnerInfo> owners, SearchMode mode,
                                     const ApproxParams& params = {});

  std::size_t size() const { return owner_of_point_.size(); }
  std::size_t dim() const { return dim_; }
  SearchMode mode() const { return mode_; }
  const ApproxParams& params() const { return params_; }
  std::size_t memory_bytes() const;

  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, dim_};
  }
  std::uint32_t owner_of(std::size_t i) const { return owner_of_point_[i]; }
  std::span<const OwnerInfo> owners() const { return owners_; }
  std::optional<std::uint32_t> find_owner(std::string_view subject_id) const;

  // Class bookkeeping per label kind: dense class ids in sorted-label order.
  std::uint32_t class_of_owner(std::uint32_t owner, LabelKind kind) const {
    return labels_[static_cast<int>(kind)].class_of_owner[owner];
  }
  std::span<const std::string> class_names(LabelKind kind) const {
    return labels_[static_cast<int>(kind)].names;
  }
  std::optional<std::uint32_t> find_class(std::string_view label, LabelKind kind) const;
  // N_k over the admissible set (the excluded owner's points removed).
  std::size_t class_point_count(std::uint32_t cls, LabelKind kind,
                                std::uint32_t excluded_owner = kNoOwner) const;

  std::vector<NeighborHit> knn(std::span<const double> query, std::size_t k,
                               std::optional<std::string_view> exclude_subject = std::nullopt) const;

  // Kernel mass exp(-|q - f_j|^2 / bandwidth_sq) per class over the k_trunc
  // nearest admissible points.
  std::map<std::string, double> range_kernel_sums(
      std::span<const double> query, double bandwidth_sq, std::size_t k_trunc,
      LabelKind kind, std::optional<std::string_view> exclude_subject = std::nullopt) const;

  // k nearest admissible points sorted by (squared distance, point index).
  // Uses the forest in approximate mode and a linear scan in exact mode.
  std::vector<Candidate> nearest(std::span<const double> query, std::size_t k,
                                 std::uint32_t excluded_owner = kNoOwner) const;
  // Always a linear scan, whatever the mode.
  std::vector<Candidate> nearest_exact(std::span<const double> query, std::size_t k,
                                       std::uint32_t excluded_owner = kNoOwner) const;

  // Binary "MDX1" file: little-endian header, points, owners and forest.
  void save(const std::filesystem::path& path) const;
  static DescriptorIndex load(const std::filesystem::path& path);

 private:
  struct Node {
    // Leaf when child[0] == kLeaf; then [begin, end) indexes the tree's perm.
    std::uint32_t child[2];
    std::uint32_t begin;
    std::uint32_t end;
    std::uint32_t split_dim;
    double split_value;
  };
  static constexpr std::uint32_t kLeaf = std::numeric_limits<std::uint32_t>::max();

  struct Tree {
    std::vector<Node> nodes;
    std::vector<std::uint32_t> perm;
  };

  struct LabelTable {
    std::vector<std::string> names;
    std::vector<std::uint32_t> class_of_owner;
    std::vector<std::size_t> point_count;
  };

  DescriptorIndex() = default;
  void finalize_tables();
  void build_forest();
  Tree build_tree(std::uint32_t tree_index) const;
  std::vector<Candidate> search_forest(std::span<const double> query, std::size_t k,
                                       std::uint32_t excluded_owner) const;
  void check_query(std::span<const double> query) const;

  std::size_t dim_ = 0;
  SearchMode mode_ = SearchMode::kExact;
  ApproxParams params_;
  std::vector<double> points_;
  std::vector<std::uint32_t> owner_of_point_;
  std::vector<OwnerInfo> owners_;
  std::vector<std::size_t> owner_point_count_;
  LabelTable labels_[3];
  std::vector<Tree> forest_;
};

double squared_l2(std::span<const double> a, std::span<const double> b);

}  // namespace memdex
