#pragma once

#include <optional>
#include <vector>

#include "concord/neighbor_index.hpp"
#include "concord/point_cloud.hpp"

namespace concord {

// A cloud prepared as a match target: indexed when large enough to pay for a
// tree, scanned linearly otherwise. Answers are identical either way. Holds a
// reference; the cloud must outlive it.
class MatchTarget {
 public:
  explicit MatchTarget(const PointCloud& cloud);

  const PointCloud& cloud() const noexcept { return *cloud_; }

  // For every point of `from`, its nearest point here.
  std::vector<Neighbor> matches_from(const PointCloud& from) const;

 private:
  const PointCloud* cloud_;
  std::optional<NeighborIndex> index_;
};

std::vector<Neighbor> nearest_matches(const PointCloud& from, const PointCloud& to);

// Both directional match lists of a pair, computed once and shared by the
// metrics below.
struct PairMatches {
  std::vector<Neighbor> a_to_b;
  std::vector<Neighbor> b_to_a;
};

PairMatches match_pair(const PointCloud& a, const PointCloud& b);

/// Chamfer distance with squared Euclidean matches; each direction is
/// normalized by its own cardinality.
double chamfer_l2(const PointCloud& a, const PointCloud& b);

/// Chamfer distance with plain Euclidean matches, halved sum of both
/// directional means.
double chamfer_l1(const PointCloud& a, const PointCloud& b);

/// Chamfer distance with the bounded kernel 1 - exp(-d) per match. Values lie
/// in [0, 2).
double density_aware_cd(const PointCloud& a, const PointCloud& b);

struct F1Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// A point counts as matched if a counterpart lies within Euclidean distance
/// `tau` (inclusive).
F1Score f1_at_threshold(const PointCloud& pred, const PointCloud& gt, double tau);

inline constexpr double kDefaultF1Threshold = 0.01;

struct MetricSet {
  double cd_l2 = 0.0;
  double cd_l1 = 0.0;
  double da_cd = 0.0;
  F1Score f1;
};

// All four metrics from one matching pass; values equal the individual calls.
MetricSet all_metrics(const PointCloud& pred, const PointCloud& gt, double tau = kDefaultF1Threshold);

}  // namespace concord
