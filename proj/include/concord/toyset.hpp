#pragma once

#include <cstdint>
#include <vector>

#include "concord/losses.hpp"

namespace concord {

struct ToyParams {
  std::size_t k1 = 100;   // neighbor pool by incomplete-cloud similarity
  std::size_t k2 = 5;     // adversaries kept per sampled element
  std::size_t n = 5000;   // target dataset size

  void validate() const;

  friend bool operator==(const ToyParams&, const ToyParams&) = default;
};

// One fixed occlusion per corpus element (hard ratio, viewpoint seeded by
// the cloud id), which is what the miner compares across elements.
std::vector<ViewPair> canonical_splits(const std::vector<PointCloud>& corpus, double ratio, std::uint64_t seed);

struct MinedGroup {
  std::size_t anchor = 0;
  std::vector<std::size_t> adversaries;
};

struct MinedDataset {
  std::vector<std::size_t> members;  // corpus indices, unique, exactly n
  std::vector<MinedGroup> groups;    // one per loop iteration
};

/// Builds a dataset of elements whose incomplete parts look alike while their
/// missing parts differ: repeatedly sample X, take the k1 elements with the
/// lowest incomplete-cloud CD to X, keep the k2 of those with the highest
/// missing-cloud CD, and append X and them (skipping duplicates) until more
/// than n elements are collected. Returns the first n.
MinedDataset mine_adversarial_subset(const std::vector<ViewPair>& corpus, const ToyParams& params,
                                     std::uint64_t seed);

/// n distinct corpus indices drawn uniformly without replacement.
std::vector<std::size_t> sample_uniform_subset(std::size_t corpus_size, std::size_t n, std::uint64_t seed);

struct NeighborGroupStats {
  double mean_incomplete_cd = 0.0;
  double mean_missing_cd = 0.0;
};

/// For every member, its k nearest other members by incomplete-cloud CD;
/// averages the incomplete CD and the missing CD over all those pairs.
NeighborGroupStats neighbor_group_stats(const std::vector<ViewPair>& corpus, const std::vector<std::size_t>& members,
                                        std::size_t k);

}  // namespace concord
