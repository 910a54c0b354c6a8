#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "concord/error.hpp"

namespace concord {

using Point3 = std::array<double, 3>;

inline double squared_distance(const Point3& a, const Point3& b) noexcept {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

inline bool is_finite(const Point3& p) noexcept {
  return std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]);
}

/// Ordered list of 3D points in normalized units. Order only matters for
/// tie-breaking; every metric is a function of the multiset.
struct PointCloud {
  std::vector<Point3> points;
  std::string id;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> pts, std::string label = {})
      : points(std::move(pts)), id(std::move(label)) {}

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  const Point3& operator[](std::size_t i) const { return points[i]; }
  Point3& operator[](std::size_t i) { return points[i]; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

inline void require_nonempty(std::span<const Point3> pts, const char* what) {
  if (pts.empty()) throw Error(ErrorCode::EmptyCloud, what);
}

inline void require_finite(std::span<const Point3> pts, const char* what) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!is_finite(pts[i])) {
      throw Error(ErrorCode::InvalidCoordinate, std::string(what) + " point " + std::to_string(i));
    }
  }
}

// Points of `a` followed by points of `b`.
inline PointCloud concat(const PointCloud& a, const PointCloud& b) {
  PointCloud out;
  out.points.reserve(a.size() + b.size());
  out.points.insert(out.points.end(), a.points.begin(), a.points.end());
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  return out;
}

}  // namespace concord
