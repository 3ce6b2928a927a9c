#include "memdex/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "memdex/error.hpp"

namespace memdex {

namespace {

constexpr double kMemberJitter = 0.05;     // anchor copy perturbation
constexpr double kGroupJitter = 0.3;       // group-anchored clutter spread
constexpr std::size_t kGroupAnchors = 64;  // per group
constexpr double kGroupScale = 3.0;
constexpr double kFamilyScale = 2.0;

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

std::vector<double> normal_vector(std::mt19937_64& rng, std::size_t n, double sigma = 1.0) {
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_families == 0 || members_min == 0 || members_max < members_min ||
      keypoints_per_subject == 0 || d_kp == 0 || d_dv == 0 || n_groups == 0) {
    fail(ErrorCode::kInvalidArgument, "synthetic config counts must be >= 1 (and min <= max)");
  }
  for (double s : {family_signal, group_signal, modality_complementarity}) {
    if (!(s >= 0.0 && s <= 1.0)) fail(ErrorCode::kInvalidArgument, "synthetic signals must lie in [0, 1]");
  }
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::vector<double>> group_means;
  std::vector<std::vector<std::vector<double>>> group_anchors(cfg.n_groups);
  for (std::size_t g = 0; g < cfg.n_groups; ++g) {
    group_means.push_back(normal_vector(rng, cfg.d_dv));
    for (std::size_t a = 0; a < kGroupAnchors; ++a) group_anchors[g].push_back(normal_vector(rng, cfg.d_kp));
  }

  std::vector<SubjectRecord> subjects;
  std::size_t subject_index = 0;
  for (std::size_t f = 0; f < cfg.n_families; ++f) {
    const double hardness = unit(rng);
    const bool shallow_blind = hardness < cfg.modality_complementarity / 2.0;
    const bool deep_blind = !shallow_blind && hardness < cfg.modality_complementarity;
    std::vector<std::vector<double>> anchors;
    for (std::size_t k = 0; k < cfg.keypoints_per_subject; ++k) anchors.push_back(normal_vector(rng, cfg.d_kp));
    const auto family_offset = normal_vector(rng, cfg.d_dv);
    const std::size_t members =
        std::uniform_int_distribution<std::size_t>(cfg.members_min, cfg.members_max)(rng);

    for (std::size_t m = 0; m < members; ++m, ++subject_index) {
      // A blind modality keeps its statistics but loses the family link:
      // the member draws private anchors / offset instead of the shared ones.
      std::vector<std::vector<double>> own_anchors;
      if (shallow_blind) {
        for (std::size_t k = 0; k < cfg.keypoints_per_subject; ++k) own_anchors.push_back(normal_vector(rng, cfg.d_kp));
      }
      const auto& member_anchors = shallow_blind ? own_anchors : anchors;
      SubjectRecord s;
      s.subject_id = numbered("S", subject_index, 4);
      s.instance_label = numbered("F", f, 3);
      const std::size_t g = std::uniform_int_distribution<std::size_t>(0, cfg.n_groups - 1)(rng);
      s.group_label = numbered("G", g, 1);

      for (std::size_t k = 0; k < cfg.keypoints_per_subject; ++k) {
        Keypoint kp;
        for (double& x : kp.position) x = 100.0 * unit(rng);
        kp.scale = 1.0 + 3.0 * unit(rng);
        const double u = unit(rng);
        const double v = unit(rng);
        kp.descriptor.resize(cfg.d_kp);
        if (u < cfg.family_signal) {
          for (std::size_t d = 0; d < cfg.d_kp; ++d) kp.descriptor[d] = member_anchors[k][d] + kMemberJitter * normal(rng);
        } else if (v < cfg.group_signal) {
          const auto& anchor = group_anchors[g][std::uniform_int_distribution<std::size_t>(0, kGroupAnchors - 1)(rng)];
          for (std::size_t d = 0; d < cfg.d_kp; ++d) kp.descriptor[d] = anchor[d] + kGroupJitter * normal(rng);
        } else {
          for (double& d : kp.descriptor) d = normal(rng);
        }
        s.keypoints.push_back(std::move(kp));
      }

      const auto own_offset = normal_vector(rng, cfg.d_dv);
      const auto& offset = deep_blind ? own_offset : family_offset;
      std::vector<double> values(cfg.d_dv);
      for (std::size_t d = 0; d < cfg.d_dv; ++d) {
        values[d] = kGroupScale * cfg.group_signal * group_means[g][d] +
                    kFamilyScale * cfg.family_signal * offset[d] + normal(rng);
      }
      s.deep_vector = DeepVector::real(std::move(values));
      subjects.push_back(std::move(s));
    }
  }
  return Dataset(std::move(subjects), cfg.d_kp, cfg.d_dv);
}

DescriptorCloud generate_descriptor_cloud(std::size_t count, std::size_t dim, std::uint64_t seed,
                                          std::size_t clusters, std::size_t latent_dim) {
  if (count == 0 || dim == 0 || clusters == 0 || latent_dim == 0) {
    fail(ErrorCode::kInvalidArgument, "descriptor cloud sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> centers, bases;
  for (std::size_t c = 0; c < clusters; ++c) {
    centers.push_back(normal_vector(rng, dim, 3.0));
    bases.push_back(normal_vector(rng, dim * latent_dim, 1.0 / std::sqrt(static_cast<double>(latent_dim))));
  }
  std::uniform_int_distribution<std::size_t> pick(0, clusters - 1);
  DescriptorCloud cloud;
  cloud.dim = dim;
  cloud.points.resize(count * dim);
  std::vector<double> z(latent_dim);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t c = pick(rng);
    for (double& x : z) x = normal(rng);
    double* p = cloud.points.data() + i * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      double x = centers[c][d];
      for (std::size_t l = 0; l < latent_dim; ++l) x += bases[c][d * latent_dim + l] * z[l];
      p[d] = x + 0.05 * normal(rng);
    }
  }
  return cloud;
}

}  // namespace memdex
