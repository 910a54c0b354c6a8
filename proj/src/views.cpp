#include "concord/views.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "concord/rng.hpp"

namespace concord {

void ViewSpec::validate() const {
  if (!is_finite(viewpoint)) throw Error(ErrorCode::InvalidCoordinate, "viewpoint");
  const double norm = std::sqrt(squared_distance(viewpoint, {0, 0, 0}));
  if (std::abs(norm - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "viewpoint must be a unit vector");
  if (!(missing_ratio > 0.0 && missing_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "missing ratio must lie strictly inside (0, 1)");
  }
}

PointCloud normalize_cloud(const PointCloud& cloud) {
  require_nonempty(cloud.points, "cannot normalize");
  require_finite(cloud.points, "cannot normalize");
  Point3 c{0, 0, 0};
  for (const auto& p : cloud.points) {
    for (int a = 0; a < 3; ++a) c[a] += p[a];
  }
  const double inv = 1.0 / static_cast<double>(cloud.size());
  for (auto& v : c) v *= inv;

  PointCloud out(cloud.points, cloud.id);
  double max_sq = 0.0;
  for (auto& p : out.points) {
    for (int a = 0; a < 3; ++a) p[a] -= c[a];
    max_sq = std::max(max_sq, squared_distance(p, {0, 0, 0}));
  }
  if (max_sq == 0.0) {
    for (auto& p : out.points) p = {0, 0, 0};
    return out;
  }
  const double scale = 1.0 / std::sqrt(max_sq);
  for (auto& p : out.points) {
    for (auto& v : p) v *= scale;
  }
  return out;
}

std::size_t missing_count(std::size_t m, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "missing ratio must lie in (0, 1)");
  const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(m) * ratio + 0.5));
  if (k < 1 || k + 1 > m) {
    throw Error(ErrorCode::DegenerateSplit,
                std::to_string(m) + " points at ratio " + std::to_string(ratio) + " leaves an empty side");
  }
  return k;
}

ViewPair split_by_viewpoint(const PointCloud& complete, const ViewSpec& spec) {
  spec.validate();
  require_finite(complete.points, "cannot split");
  if (complete.size() < 2) throw Error(ErrorCode::DegenerateSplit, "need at least 2 points");
  const std::size_t k = missing_count(complete.size(), spec.missing_ratio);

  std::vector<double> dist(complete.size());
  for (std::size_t i = 0; i < complete.size(); ++i) dist[i] = squared_distance(complete[i], spec.viewpoint);
  std::vector<std::size_t> order(complete.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });

  std::vector<char> is_missing(complete.size(), 0);
  for (std::size_t i = 0; i < k; ++i) is_missing[order[i]] = 1;

  ViewPair out;
  out.incomplete.id = complete.id;
  out.missing.id = complete.id;
  out.missing.points.reserve(k);
  out.incomplete.points.reserve(complete.size() - k);
  for (std::size_t i = 0; i < complete.size(); ++i) {
    (is_missing[i] ? out.missing : out.incomplete).points.push_back(complete[i]);
  }
  return out;
}

std::vector<Point3> draw_viewpoints(std::size_t n, std::uint64_t seed, const std::string& cloud_id) {
  Rng rng(derive_seed(seed, hash_label(cloud_id)));
  std::vector<Point3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(rng.unit_vector());
  return out;
}

std::vector<ViewPair> sample_view_set(const PointCloud& complete, std::size_t n, double ratio, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InsufficientViews, "n must be >= 1");
  std::vector<ViewPair> out;
  out.reserve(n);
  for (const auto& v : draw_viewpoints(n, seed, complete.id)) out.push_back(split_by_viewpoint(complete, {v, ratio}));
  return out;
}

PointCloud resample(const PointCloud& cloud, std::size_t m) {
  require_nonempty(cloud.points, "cannot resample");
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "target count must be >= 1");
  const std::size_t size = cloud.size();
  if (size == m) return cloud;

  PointCloud out;
  out.id = cloud.id;
  out.points.reserve(m);
  if (size < m) {
    out.points = cloud.points;
    for (std::size_t i = 0; out.size() < m; ++i) out.points.push_back(cloud[i % size]);
    return out;
  }

  std::vector<double> min_sq(size, std::numeric_limits<double>::infinity());
  std::size_t current = 0;
  for (std::size_t picked = 0; picked < m; ++picked) {
    out.points.push_back(cloud[current]);
    min_sq[current] = -1.0;  // never picked again
    std::size_t next = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size; ++i) {
      if (min_sq[i] < 0.0) continue;
      min_sq[i] = std::min(min_sq[i], squared_distance(cloud[i], cloud[current]));
      if (min_sq[i] > best) {
        best = min_sq[i];
        next = i;
      }
    }
    current = next;
  }
  return out;
}

}  // namespace concord
