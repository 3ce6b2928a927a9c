#include "memdex/ann_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>

#include "memdex/error.hpp"

namespace memdex {

namespace {

// Rejects early once the running sum exceeds bound. Accepted values are
// bit-identical to squared_l2 since the summation order is the same.
double squared_l2_bounded(const double* a, const double* b, std::size_t dim, double bound) {
  double sum = 0.0;
  std::size_t i = 0;
  for (; i + 8 <= dim; i += 8) {
    for (std::size_t j = i; j < i + 8; ++j) {
      const double d = a[j] - b[j];
      sum += d * d;
    }
    if (sum > bound) return sum;
  }
  for (; i < dim; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

// Bounded max-heap of the k best candidates seen so far.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  bool full() const { return heap_.size() >= k_; }
  double worst() const {
    return full() ? heap_.front().squared_distance : std::numeric_limits<double>::infinity();
  }
  void offer(const Candidate& c) {
    if (full() && !(c < heap_.front())) return;
    if (!full()) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end());
      return;
    }
    std::pop_heap(heap_.begin(), heap_.end());
    heap_.back() = c;
    std::push_heap(heap_.begin(), heap_.end());
  }
  bool contains(std::uint32_t point) const {
    return std::any_of(heap_.begin(), heap_.end(),
                       [point](const Candidate& c) { return c.point == point; });
  }
  std::vector<Candidate> take_sorted() {
    std::sort(heap_.begin(), heap_.end());
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Candidate> heap_;
};

// --- little-endian binary helpers for the MDX1 format ---

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  Reader(std::istream& is, std::string path) : is_(is), path_(std::move(path)) {}

  std::uint64_t u(int bytes) {
    unsigned char b[8];
    if (!is_.read(reinterpret_cast<char*>(b), bytes)) {
      fail(ErrorCode::kParse, path_ + ": truncated index file");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t{b[i]} << (8 * i);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(u(4)); }
  std::uint64_t u64() { return u(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > (1u << 20)) fail(ErrorCode::kParse, path_ + ": implausible string length");
    std::string s(n, '\0');
    if (n && !is_.read(s.data(), n)) fail(ErrorCode::kParse, path_ + ": truncated index file");
    return s;
  }

 private:
  std::istream& is_;
  std::string path_;
};

constexpr char kMagic[4] = {'M', 'D', 'X', '1'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

double squared_l2(std::span<const double> a, std::span<const double> b) {
  return squared_l2_bounded(a.data(), b.data(), a.size(), std::numeric_limits<double>::infinity());
}

DescriptorIndex DescriptorIndex::build(const Dataset& ds, FeatureKind which, SearchMode mode,
                                       const ApproxParams& params) {
  return build(DatasetView(ds), which, mode, params);
}

DescriptorIndex DescriptorIndex::build(const DatasetView& view, FeatureKind which,
                                       SearchMode mode, const ApproxParams& params) {
  const Dataset& ds = view.dataset();
  const std::size_t dim = which == FeatureKind::kKeypoints ? ds.d_kp() : ds.d_dv();
  std::vector<double> points;
  std::vector<std::uint32_t> owner_of_point;
  std::vector<OwnerInfo> owners;
  owners.reserve(view.size());
  if (which == FeatureKind::kKeypoints) points.reserve(view.total_keypoints() * dim);
  for (std::size_t i = 0; i < view.size(); ++i) {
    const SubjectRecord& s = view.subject(i);
    const auto owner = static_cast<std::uint32_t>(owners.size());
    owners.push_back({s.subject_id, s.instance_label, s.group_label});
    if (which == FeatureKind::kKeypoints) {
      for (const Keypoint& kp : s.keypoints) {
        points.insert(points.end(), kp.descriptor.begin(), kp.descriptor.end());
        owner_of_point.push_back(owner);
      }
    } else if (s.deep_vector) {
      auto values = s.deep_vector->to_values();
      points.insert(points.end(), values.begin(), values.end());
      owner_of_point.push_back(owner);
    }
  }
  return from_points(std::move(points), dim, std::move(owner_of_point), std::move(owners), mode,
                     params);
}

DescriptorIndex DescriptorIndex::from_points(std::vector<double> points, std::size_t dim,
                                             std::vector<std::uint32_t> owner_of_point,
                                             std::vector<OwnerInfo> owners, SearchMode mode,
                                             const ApproxParams& params) {
  if (owner_of_point.empty()) fail(ErrorCode::kEmptyIndex, "no descriptors to index");
  if (dim == 0 || points.size() != owner_of_point.size() * dim) {
    fail(ErrorCode::kDimensionMismatch, "point buffer does not match count x dim");
  }
  if (owner_of_point.size() >= std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::kInvalidArgument, "too many points for 32-bit point indices");
  }
  if (params.trees == 0 || params.leaf_size == 0 || params.max_checked_leaves == 0) {
    fail(ErrorCode::kInvalidArgument, "approximate parameters must be positive");
  }
  for (std::uint32_t o : owner_of_point) {
    if (o >= owners.size()) fail(ErrorCode::kInvalidArgument, "point owner out of range");
  }
  DescriptorIndex idx;
  idx.dim_ = dim;
  idx.mode_ = mode;
  idx.params_ = params;
  idx.points_ = std::move(points);
  idx.owner_of_point_ = std::move(owner_of_point);
  idx.owners_ = std::move(owners);
  idx.finalize_tables();
  if (mode == SearchMode::kApproximate) idx.build_forest();
  return idx;
}

void DescriptorIndex::finalize_tables() {
  owner_point_count_.assign(owners_.size(), 0);
  for (std::uint32_t o : owner_of_point_) ++owner_point_count_[o];
  for (LabelKind kind : {LabelKind::kSubject, LabelKind::kInstance, LabelKind::kGroup}) {
    LabelTable& t = labels_[static_cast<int>(kind)];
    auto label = [kind](const OwnerInfo& o) -> const std::string& {
      switch (kind) {
        case LabelKind::kInstance: return o.instance_label;
        case LabelKind::kGroup: return o.group_label;
        default: return o.subject_id;
      }
    };
    t.names.clear();
    for (const auto& o : owners_) t.names.push_back(label(o));
    std::sort(t.names.begin(), t.names.end());
    t.names.erase(std::unique(t.names.begin(), t.names.end()), t.names.end());
    if (kind == LabelKind::kSubject && t.names.size() != owners_.size()) {
      fail(ErrorCode::kDuplicateId, "duplicate subject_id among index owners");
    }
    t.class_of_owner.resize(owners_.size());
    t.point_count.assign(t.names.size(), 0);
    for (std::size_t o = 0; o < owners_.size(); ++o) {
      auto it = std::lower_bound(t.names.begin(), t.names.end(), label(owners_[o]));
      const auto cls = static_cast<std::uint32_t>(it - t.names.begin());
      t.class_of_owner[o] = cls;
      t.point_count[cls] += owner_point_count_[o];
    }
  }
}

std::size_t DescriptorIndex::memory_bytes() const {
  std::size_t bytes = points_.size() * sizeof(double) + owner_of_point_.size() * sizeof(std::uint32_t);
  for (const Tree& t : forest_) {
    bytes += t.nodes.size() * sizeof(Node) + t.perm.size() * sizeof(std::uint32_t);
  }
  return bytes;
}

std::optional<std::uint32_t> DescriptorIndex::find_owner(std::string_view subject_id) const {
  auto cls = find_class(subject_id, LabelKind::kSubject);
  if (!cls) return std::nullopt;
  // Subject classes are in sorted-id order; map back to the owner slot.
  const auto& table = labels_[static_cast<int>(LabelKind::kSubject)];
  for (std::uint32_t o = 0; o < owners_.size(); ++o) {
    if (table.class_of_owner[o] == *cls) return o;
  }
  return std::nullopt;
}

std::optional<std::uint32_t> DescriptorIndex::find_class(std::string_view label,
                                                         LabelKind kind) const {
  const auto& names = labels_[static_cast<int>(kind)].names;
  auto it = std::lower_bound(names.begin(), names.end(), label);
  if (it == names.end() || *it != label) return std::nullopt;
  return static_cast<std::uint32_t>(it - names.begin());
}

std::size_t DescriptorIndex::class_point_count(std::uint32_t cls, LabelKind kind,
                                               std::uint32_t excluded_owner) const {
  const auto& t = labels_[static_cast<int>(kind)];
  std::size_t n = t.point_count[cls];
  if (excluded_owner != kNoOwner && t.class_of_owner[excluded_owner] == cls) {
    n -= owner_point_count_[excluded_owner];
  }
  return n;
}

void DescriptorIndex::check_query(std::span<const double> query) const {
  if (query.size() != dim_) {
    fail(ErrorCode::kDimensionMismatch, "query has dimension " + std::to_string(query.size()) +
                                            ", index has " + std::to_string(dim_));
  }
}

std::vector<Candidate> DescriptorIndex::nearest(std::span<const double> query, std::size_t k,
                                                std::uint32_t excluded_owner) const {
  check_query(query);
  if (k == 0) fail(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (mode_ == SearchMode::kApproximate) return search_forest(query, k, excluded_owner);
  return nearest_exact(query, k, excluded_owner);
}

std::vector<Candidate> DescriptorIndex::nearest_exact(std::span<const double> query,
                                                      std::size_t k,
                                                      std::uint32_t excluded_owner) const {
  check_query(query);
  if (k == 0) fail(ErrorCode::kInvalidArgument, "k must be at least 1");
  const std::size_t n = size();
  const double* q = query.data();
  if (k >= n) {
    std::vector<Candidate> all;
    all.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (owner_of_point_[i] == excluded_owner) continue;
      all.push_back({squared_l2_bounded(q, points_.data() + i * dim_, dim_,
                                        std::numeric_limits<double>::infinity()),
                     static_cast<std::uint32_t>(i)});
    }
    std::sort(all.begin(), all.end());
    return all;
  }
  TopK top(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (owner_of_point_[i] == excluded_owner) continue;
    const double bound = top.worst();
    const double sq = squared_l2_bounded(q, points_.data() + i * dim_, dim_, bound);
    if (sq <= bound) top.offer({sq, static_cast<std::uint32_t>(i)});
  }
  return top.take_sorted();
}

DescriptorIndex::Tree DescriptorIndex::build_tree(std::uint32_t tree_index) const {
  constexpr std::size_t kSample = 100;
  constexpr std::size_t kTopDims = 5;
  std::mt19937_64 rng(params_.seed + 0x9e3779b97f4a7c15ULL * (tree_index + 1));
  Tree tree;
  const auto n = static_cast<std::uint32_t>(size());
  tree.perm.resize(n);
  std::iota(tree.perm.begin(), tree.perm.end(), 0u);
  std::shuffle(tree.perm.begin(), tree.perm.end(), rng);

  auto value = [this](std::uint32_t p, std::uint32_t d) { return points_[std::size_t{p} * dim_ + d]; };

  struct Pending {
    std::uint32_t node, begin, end;
  };
  tree.nodes.push_back({{kLeaf, kLeaf}, 0, n, 0, 0.0});
  std::vector<Pending> stack{{0, 0, n}};
  std::vector<double> mean(dim_), var(dim_);
  std::vector<std::uint32_t> order(dim_);
  while (!stack.empty()) {
    const Pending job = stack.back();
    stack.pop_back();
    const std::uint32_t count = job.end - job.begin;
    if (count <= params_.leaf_size) continue;

    const std::size_t sample = std::min<std::size_t>(kSample, count);
    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(var.begin(), var.end(), 0.0);
    for (std::size_t s = 0; s < sample; ++s) {
      const std::uint32_t p = tree.perm[job.begin + s];
      for (std::uint32_t d = 0; d < dim_; ++d) mean[d] += value(p, d);
    }
    for (double& m : mean) m /= static_cast<double>(sample);
    for (std::size_t s = 0; s < sample; ++s) {
      const std::uint32_t p = tree.perm[job.begin + s];
      for (std::uint32_t d = 0; d < dim_; ++d) {
        const double diff = value(p, d) - mean[d];
        var[d] += diff * diff;
      }
    }
    std::iota(order.begin(), order.end(), 0u);
    const std::size_t top = std::min(kTopDims, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        return var[a] > var[b] || (var[a] == var[b] && a < b);
                      });
    std::uint32_t split_dim = order[std::uniform_int_distribution<std::size_t>(0, top - 1)(rng)];
    double split = mean[split_dim];

    auto first = tree.perm.begin() + job.begin;
    auto last = tree.perm.begin() + job.end;
    auto mid = std::partition(first, last, [&](std::uint32_t p) { return value(p, split_dim) < split; });
    if (mid == first || mid == last) {
      // Sampled mean failed to separate: median split on the widest dimension.
      double best_spread = 0.0;
      for (std::uint32_t d = 0; d < dim_; ++d) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (auto it = first; it != last; ++it) {
          lo = std::min(lo, value(*it, d));
          hi = std::max(hi, value(*it, d));
        }
        if (hi - lo > best_spread) {
          best_spread = hi - lo;
          split_dim = d;
        }
      }
      if (best_spread == 0.0) continue;  // identical points stay in one leaf
      mid = first + count / 2;
      std::nth_element(first, mid, last, [&](std::uint32_t a, std::uint32_t b) {
        return value(a, split_dim) < value(b, split_dim);
      });
      split = value(*mid, split_dim);
    }
    const auto mid_pos = static_cast<std::uint32_t>(mid - tree.perm.begin());
    const auto left = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.push_back({{kLeaf, kLeaf}, job.begin, mid_pos, 0, 0.0});
    tree.nodes.push_back({{kLeaf, kLeaf}, mid_pos, job.end, 0, 0.0});
    Node& parent = tree.nodes[job.node];
    parent.child[0] = left;
    parent.child[1] = left + 1;
    parent.split_dim = split_dim;
    parent.split_value = split;
    stack.push_back({left + 1, mid_pos, job.end});
    stack.push_back({left, job.begin, mid_pos});
  }
  return tree;
}

void DescriptorIndex::build_forest() {
  forest_.assign(params_.trees, Tree{});
  // Each tree is seeded by its own index, so the schedule cannot matter.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(params_.trees); ++t) {
    forest_[static_cast<std::size_t>(t)] = build_tree(static_cast<std::uint32_t>(t));
  }
}

std::vector<Candidate> DescriptorIndex::search_forest(std::span<const double> query,
                                                      std::size_t k,
                                                      std::uint32_t excluded_owner) const {
  struct Branch {
    double bound;
    std::uint32_t tree;
    std::uint32_t node;
    bool operator>(const Branch& o) const {
      return bound > o.bound || (bound == o.bound && (tree > o.tree || (tree == o.tree && node > o.node)));
    }
  };
  std::priority_queue<Branch, std::vector<Branch>, std::greater<>> branches;
  TopK top(std::min(k, size()));
  const double* q = query.data();
  std::uint32_t checks = 0;

  auto descend = [&](std::uint32_t t, std::uint32_t node, double bound) {
    const Tree& tree = forest_[t];
    while (tree.nodes[node].child[0] != kLeaf) {
      const Node& n = tree.nodes[node];
      const double diff = q[n.split_dim] - n.split_value;
      const std::uint32_t near = diff < 0 ? n.child[0] : n.child[1];
      const std::uint32_t far = diff < 0 ? n.child[1] : n.child[0];
      const double far_bound = std::max(bound, diff * diff);
      if (!top.full() || far_bound <= top.worst()) branches.push({far_bound, t, far});
      node = near;
    }
    ++checks;
    const Node& leaf = tree.nodes[node];
    for (std::uint32_t i = leaf.begin; i < leaf.end; ++i) {
      const std::uint32_t p = tree.perm[i];
      if (owner_of_point_[p] == excluded_owner) continue;
      const double worst = top.worst();
      const double sq = squared_l2_bounded(q, points_.data() + std::size_t{p} * dim_, dim_, worst);
      if (sq <= worst && !top.contains(p)) top.offer({sq, p});
    }
  };

  for (std::uint32_t t = 0; t < forest_.size(); ++t) descend(t, 0, 0.0);
  while (!branches.empty() && checks < params_.max_checked_leaves) {
    const Branch b = branches.top();
    branches.pop();
    if (top.full() && b.bound > top.worst()) break;
    descend(b.tree, b.node, b.bound);
  }
  return top.take_sorted();
}

std::vector<NeighborHit> DescriptorIndex::knn(std::span<const double> query, std::size_t k,
                                              std::optional<std::string_view> exclude_subject) const {
  std::uint32_t excluded = kNoOwner;
  if (exclude_subject) {
    if (auto o = find_owner(*exclude_subject)) excluded = *o;
  }
  std::vector<NeighborHit> hits;
  for (const Candidate& c : nearest(query, k, excluded)) {
    const std::uint32_t o = owner_of_point_[c.point];
    hits.push_back({c.point, std::sqrt(c.squared_distance), c.squared_distance, o,
                    owners_[o].subject_id, owners_[o].instance_label, owners_[o].group_label});
  }
  return hits;
}

std::map<std::string, double> DescriptorIndex::range_kernel_sums(
    std::span<const double> query, double bandwidth_sq, std::size_t k_trunc, LabelKind kind,
    std::optional<std::string_view> exclude_subject) const {
  if (!(bandwidth_sq > 0.0) || !std::isfinite(bandwidth_sq)) {
    fail(ErrorCode::kInvalidArgument, "bandwidth_sq must be positive and finite");
  }
  std::uint32_t excluded = kNoOwner;
  if (exclude_subject) {
    if (auto o = find_owner(*exclude_subject)) excluded = *o;
  }
  std::vector<double> mass(class_names(kind).size(), 0.0);
  for (const Candidate& c : nearest(query, k_trunc, excluded)) {
    mass[class_of_owner(owner_of_point_[c.point], kind)] +=
        std::exp(-c.squared_distance / bandwidth_sq);
  }
  std::map<std::string, double> out;
  const auto names = class_names(kind);
  for (std::size_t c = 0; c < names.size(); ++c) out.emplace(names[c], mass[c]);
  return out;
}

void DescriptorIndex::save(const std::filesystem::path& path) const {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::kMissingFile, "cannot write " + tmp.string());
    os.write(kMagic, 4);
    put_u32(os, kFormatVersion);
    put_u32(os, static_cast<std::uint32_t>(mode_));
    put_u32(os, static_cast<std::uint32_t>(dim_));
    put_u64(os, size());
    put_u32(os, params_.trees);
    put_u32(os, params_.leaf_size);
    put_u32(os, params_.max_checked_leaves);
    put_u64(os, params_.seed);
    put_u32(os, static_cast<std::uint32_t>(owners_.size()));
    for (const auto& o : owners_) {
      put_str(os, o.subject_id);
      put_str(os, o.instance_label);
      put_str(os, o.group_label);
    }
    for (std::uint32_t o : owner_of_point_) put_u32(os, o);
    for (double v : points_) put_f64(os, v);
    put_u32(os, static_cast<std::uint32_t>(forest_.size()));
    for (const Tree& t : forest_) {
      put_u32(os, static_cast<std::uint32_t>(t.nodes.size()));
      for (const Node& n : t.nodes) {
        put_u32(os, n.child[0]);
        put_u32(os, n.child[1]);
        put_u32(os, n.begin);
        put_u32(os, n.end);
        put_u32(os, n.split_dim);
        put_f64(os, n.split_value);
      }
      for (std::uint32_t p : t.perm) put_u32(os, p);
    }
    if (!os) fail(ErrorCode::kMissingFile, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

DescriptorIndex DescriptorIndex::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::kMissingFile, "cannot open index file " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    fail(ErrorCode::kParse, path.string() + ": bad magic, expected MDX1");
  }
  Reader r(is, path.string());
  if (r.u32() != kFormatVersion) fail(ErrorCode::kParse, path.string() + ": unsupported version");
  const std::uint32_t mode = r.u32();
  if (mode > 1) fail(ErrorCode::kParse, path.string() + ": bad mode");
  const std::size_t dim = r.u32();
  const std::uint64_t count = r.u64();
  ApproxParams params;
  params.trees = r.u32();
  params.leaf_size = r.u32();
  params.max_checked_leaves = r.u32();
  params.seed = r.u64();
  std::vector<OwnerInfo> owners(r.u32());
  for (auto& o : owners) {
    o.subject_id = r.str();
    o.instance_label = r.str();
    o.group_label = r.str();
  }
  if (dim == 0 || count == 0 || count >= std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::kParse, path.string() + ": bad header counts");
  }
  std::vector<std::uint32_t> owner_of_point(count);
  for (auto& o : owner_of_point) o = r.u32();
  std::vector<double> points(count * dim);
  for (auto& v : points) v = r.f64();

  DescriptorIndex idx;
  idx.dim_ = dim;
  idx.mode_ = static_cast<SearchMode>(mode);
  idx.params_ = params;
  idx.points_ = std::move(points);
  idx.owner_of_point_ = std::move(owner_of_point);
  idx.owners_ = std::move(owners);
  for (std::uint32_t o : idx.owner_of_point_) {
    if (o >= idx.owners_.size()) fail(ErrorCode::kParse, path.string() + ": owner out of range");
  }
  idx.finalize_tables();
  const std::uint32_t trees = r.u32();
  for (std::uint32_t t = 0; t < trees; ++t) {
    Tree tree;
    tree.nodes.resize(r.u32());
    for (Node& n : tree.nodes) {
      n.child[0] = r.u32();
      n.child[1] = r.u32();
      n.begin = r.u32();
      n.end = r.u32();
      n.split_dim = r.u32();
      n.split_value = r.f64();
      const bool leaf = n.child[0] == kLeaf;
      if ((!leaf && (n.child[0] >= tree.nodes.size() || n.child[1] >= tree.nodes.size() ||
                     n.split_dim >= dim)) ||
          n.begin > n.end || n.end > count) {
        fail(ErrorCode::kParse, path.string() + ": corrupt tree node");
      }
    }
    tree.perm.resize(count);
    for (auto& p : tree.perm) {
      p = r.u32();
      if (p >= count) fail(ErrorCode::kParse, path.string() + ": corrupt tree permutation");
    }
    idx.forest_.push_back(std::move(tree));
  }
  if (idx.mode_ == SearchMode::kApproximate && idx.forest_.empty()) {
    fail(ErrorCode::kParse, path.string() + ": approximate index without trees");
  }
  return idx;
}

}  // namespace memdex
