#include "concord/neighbor_index.hpp"

#include <algorithm>
#include <limits>

namespace concord {

namespace {

constexpr std::uint32_t kLeafSize = 8;
constexpr std::size_t kMaxDepth = 64;

inline bool better(double d, std::size_t id, const Neighbor& best) noexcept {
  return d < best.sq_dist || (d == best.sq_dist && id < best.id);
}

}  // namespace

NeighborIndex::NeighborIndex(std::span<const Point3> points) {
  require_nonempty(points, "cannot index");
  require_finite(points, "cannot index");
  if (points.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "cloud too large to index");
  }
  entries_.reserve(points.size());
  for (std::uint32_t i = 0; i < points.size(); ++i) entries_.push_back({points[i], i});
  nodes_.reserve(4 * points.size() / kLeafSize + 4);
  nodes_.emplace_back();
  const auto root = build(0, static_cast<std::uint32_t>(entries_.size()));
  nodes_[0] = nodes_[root];
}

std::uint32_t NeighborIndex::build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= kLeafSize) {
    nodes_.push_back(node);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }
  Point3 lo = entries_[begin].p;
  Point3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    const auto& p = entries_[i].p;
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  std::uint8_t axis = 0;
  for (std::uint8_t a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  if (hi[axis] == lo[axis]) {
    // All points coincide; nothing to split.
    nodes_.push_back(node);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(entries_.begin() + begin, entries_.begin() + mid, entries_.begin() + end,
                   [axis](const Entry& x, const Entry& y) { return x.p[axis] < y.p[axis]; });
  node.axis = axis;
  node.split = entries_[mid].p[axis];
  node.left = build(begin, mid);
  node.right = build(mid, end);
  nodes_.push_back(node);
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

Neighbor NeighborIndex::nearest(const Point3& q) const {
  if (!is_finite(q)) throw Error(ErrorCode::InvalidCoordinate, "query point");
  Neighbor best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};

  // Pending far subtrees with the squared plane gap that bounds them.
  struct Pending {
    std::uint32_t node;
    double bound;
  };
  Pending stack[kMaxDepth];
  std::size_t top = 0;
  std::uint32_t current = 0;
  for (;;) {
    const Node& node = nodes_[current];
    if (node.left == 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const double d = squared_distance(entries_[i].p, q);
        if (better(d, entries_[i].id, best)) best = {entries_[i].id, d};
      }
      // Left holds coordinates <= split, right >= split, so the plane gap is
      // a lower bound across it. Equality is still visited: a lower id may
      // sit at exactly the best distance.
      for (;;) {
        if (top == 0) return best;
        const Pending next = stack[--top];
        if (next.bound <= best.sq_dist) {
          current = next.node;
          break;
        }
      }
      continue;
    }
    const double gap = q[node.axis] - node.split;
    const bool go_left = gap < 0.0;
    stack[top++] = {go_left ? node.right : node.left, gap * gap};
    current = go_left ? node.left : node.right;
  }
}

NeighborIndex build_index(const PointCloud& cloud) { return NeighborIndex(cloud); }

Neighbor nearest_linear(std::span<const Point3> points, const Point3& query) {
  require_nonempty(points, "cannot search");
  if (!is_finite(query)) throw Error(ErrorCode::InvalidCoordinate, "query point");
  Neighbor best{0, squared_distance(points[0], query)};
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d = squared_distance(points[i], query);
    if (d < best.sq_dist) best = {i, d};
  }
  return best;
}

}  // namespace concord
