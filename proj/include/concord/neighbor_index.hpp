#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "concord/point_cloud.hpp"

namespace concord {

struct Neighbor {
  std::size_t id = 0;
  double sq_dist = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exact nearest-neighbor index (kd-tree with bucketed leaves) over a copy of
/// one cloud. Immutable once built, so concurrent queries are safe.
///
/// Ties are broken by the lowest point id, which makes every answer identical
/// to a linear scan that keeps the first strict minimum.
class NeighborIndex {
 public:
  explicit NeighborIndex(std::span<const Point3> points);
  explicit NeighborIndex(const PointCloud& cloud) : NeighborIndex(std::span<const Point3>(cloud.points)) {}

  Neighbor nearest(const Point3& query) const;

  std::size_t size() const noexcept { return entries_.size(); }

 private:
  struct Entry {
    Point3 p;
    std::uint32_t id;
  };

  struct Node {
    // Leaf when left == 0: entries [begin, end).
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double split = 0.0;
    std::uint8_t axis = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Entry> entries_;  // leaf-contiguous
  std::vector<Node> nodes_;     // root at 0
};

NeighborIndex build_index(const PointCloud& cloud);

// Linear scan with the same tie rule as NeighborIndex.
Neighbor nearest_linear(std::span<const Point3> points, const Point3& query);

}  // namespace concord
