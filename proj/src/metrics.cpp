#include "concord/metrics.hpp"

#include <cmath>

namespace concord {

namespace {

constexpr std::size_t kIndexThreshold = 48;

template <typename Kernel>
double directional_mean(const std::vector<Neighbor>& matches, Kernel kernel) {
  double sum = 0.0;
  for (const auto& m : matches) sum += kernel(m.sq_dist);
  return sum / static_cast<double>(matches.size());
}

void check_operands(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a.points, "first operand");
  require_nonempty(b.points, "second operand");
}

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::InvalidThreshold, "tau must be positive");
}

double squared(double d2) { return d2; }
double euclidean(double d2) { return std::sqrt(d2); }
// 1 - exp(-d) is monotone in d, so the Euclidean nearest neighbor is also
// the kernel minimizer.
double bounded(double d2) { return -std::expm1(-std::sqrt(d2)); }

F1Score f1_from(const PairMatches& m, double tau) {
  const double tau2 = tau * tau;
  const auto within = [tau2](double d2) { return d2 <= tau2 ? 1.0 : 0.0; };
  F1Score s;
  s.precision = directional_mean(m.a_to_b, within);
  s.recall = directional_mean(m.b_to_a, within);
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace

MatchTarget::MatchTarget(const PointCloud& cloud) : cloud_(&cloud) {
  require_nonempty(cloud.points, "match target");
  if (cloud.size() >= kIndexThreshold) {
    index_.emplace(cloud);
  } else {
    require_finite(cloud.points, "match target");
  }
}

std::vector<Neighbor> MatchTarget::matches_from(const PointCloud& from) const {
  std::vector<Neighbor> out;
  out.reserve(from.size());
  if (index_) {
    for (const auto& p : from.points) out.push_back(index_->nearest(p));
  } else {
    for (const auto& p : from.points) out.push_back(nearest_linear(cloud_->points, p));
  }
  return out;
}

std::vector<Neighbor> nearest_matches(const PointCloud& from, const PointCloud& to) {
  return MatchTarget(to).matches_from(from);
}

PairMatches match_pair(const PointCloud& a, const PointCloud& b) {
  check_operands(a, b);
  return {nearest_matches(a, b), nearest_matches(b, a)};
}

double chamfer_l2(const PointCloud& a, const PointCloud& b) {
  const auto m = match_pair(a, b);
  return directional_mean(m.a_to_b, squared) + directional_mean(m.b_to_a, squared);
}

double chamfer_l1(const PointCloud& a, const PointCloud& b) {
  const auto m = match_pair(a, b);
  return 0.5 * (directional_mean(m.a_to_b, euclidean) + directional_mean(m.b_to_a, euclidean));
}

double density_aware_cd(const PointCloud& a, const PointCloud& b) {
  const auto m = match_pair(a, b);
  return directional_mean(m.a_to_b, bounded) + directional_mean(m.b_to_a, bounded);
}

F1Score f1_at_threshold(const PointCloud& pred, const PointCloud& gt, double tau) {
  check_tau(tau);
  return f1_from(match_pair(pred, gt), tau);
}

MetricSet all_metrics(const PointCloud& pred, const PointCloud& gt, double tau) {
  check_tau(tau);
  const auto m = match_pair(pred, gt);
  MetricSet s;
  s.cd_l2 = directional_mean(m.a_to_b, squared) + directional_mean(m.b_to_a, squared);
  s.cd_l1 = 0.5 * (directional_mean(m.a_to_b, euclidean) + directional_mean(m.b_to_a, euclidean));
  s.da_cd = directional_mean(m.a_to_b, bounded) + directional_mean(m.b_to_a, bounded);
  s.f1 = f1_from(m, tau);
  return s;
}

}  // namespace concord
