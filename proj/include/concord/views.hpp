#pragma once

#include <cstdint>
#include <vector>

#include "concord/losses.hpp"
#include "concord/point_cloud.hpp"

namespace concord {

struct ViewSpec {
  Point3 viewpoint{0.0, 0.0, 1.0};  // unit direction; the eye sits at distance 1
  double missing_ratio = 0.75;

  void validate() const;
};

// Named difficulty levels: fraction of points removed.
inline constexpr double kRatioSimple = 0.25;
inline constexpr double kRatioModerate = 0.50;
inline constexpr double kRatioHard = 0.75;

/// Center on the centroid and scale so the farthest point has norm 1. A cloud
/// of identical points maps to all zeros.
PointCloud normalize_cloud(const PointCloud& cloud);

// Number of points an occlusion removes from a cloud of m points
// (round half up). Throws DegenerateSplit if either side would be empty.
std::size_t missing_count(std::size_t m, double ratio);

/// Removes the points nearest to the viewpoint. Both halves keep the input's
/// relative order; distance ties go to the lower point id.
ViewPair split_by_viewpoint(const PointCloud& complete, const ViewSpec& spec);

// The n viewpoints sample_view_set draws for this (seed, cloud id).
std::vector<Point3> draw_viewpoints(std::size_t n, std::uint64_t seed, const std::string& cloud_id);

/// n occlusions from viewpoints uniform on the sphere; a pure function of
/// (cloud, n, ratio, seed, cloud id).
std::vector<ViewPair> sample_view_set(const PointCloud& complete, std::size_t n, double ratio, std::uint64_t seed);

/// Exactly m points: farthest-point sampling from point 0 when shrinking,
/// round-robin repetition in id order when growing.
PointCloud resample(const PointCloud& cloud, std::size_t m);

}  // namespace concord
