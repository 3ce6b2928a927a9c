#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "memdex/ann_index.hpp"
#include "memdex/dataset.hpp"

namespace memdex {

// Synthetic corpus with controllable family, group and modality structure.
struct SynthConfig {
  std::size_t n_families = 40;
  std::size_t members_min = 2;  // members per family ~ uniform[min, max]
  std::size_t members_max = 2;
  std::size_t keypoints_per_subject = 200;
  std::size_t d_kp = kDefaultKeypointDim;
  std::size_t d_dv = 32;
  std::size_t n_groups = 2;
  // Probability that a keypoint is a perturbed copy of a family anchor
  // rather than clutter; also scales the shared family offset of deep vectors.
  double family_signal = 0.9;
  // Separation of group means in deep space and the share of clutter
  // keypoints drawn near group anchors.
  double group_signal = 0.5;
  // Fraction of families whose family link is erased in exactly one modality
  // (half shallow-blind, half deep-blind), so the modalities err on
  // disjoint pairs.
  double modality_complementarity = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

// Deterministic for a fixed config: same seed, same dataset bit-for-bit.
Dataset generate_synthetic(const SynthConfig& cfg);

// Descriptor cloud with low intrinsic dimension (clustered linear latent
// structure), the regime keypoint descriptors occupy in practice.
struct DescriptorCloud {
  std::size_t dim = 0;
  std::vector<double> points;  // row-major
};

DescriptorCloud generate_descriptor_cloud(std::size_t count, std::size_t dim, std::uint64_t seed,
                                          std::size_t clusters = 64,
                                          std::size_t latent_dim = 8);

}  // namespace memdex
