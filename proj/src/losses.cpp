#include "concord/losses.hpp"

#include <algorithm>
#include <cmath>

#include "concord/metrics.hpp"

namespace concord {

namespace {

void require_predictions(const CompletionSample& s) {
  if (s.predictions.empty() || s.predictions.size() != s.views.size()) {
    throw Error(ErrorCode::PredictionsAbsent, "expected " + std::to_string(s.views.size()) + " predictions, got " +
                                                  std::to_string(s.predictions.size()));
  }
}

void require_views(const CompletionSample& s, std::size_t minimum) {
  if (s.views.size() < minimum) {
    throw Error(ErrorCode::InsufficientViews,
                "need at least " + std::to_string(minimum) + " views, got " + std::to_string(s.views.size()));
  }
}

inline void add_scaled(std::span<Point3> grad, std::size_t i, double s, const Point3& v) {
  if (i >= grad.size()) return;
  grad[i][0] += s * v[0];
  grad[i][1] += s * v[1];
  grad[i][2] += s * v[2];
}

inline Point3 diff(const Point3& a, const Point3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

// One direction of a Chamfer-type sum: scale/|from| * sum kernel(|f - nn(f)|).
// `value_and_slope` maps a squared distance to (kernel, d kernel / d sq_dist).
template <typename Kernel>
double accumulate_direction(const PointCloud& from, const MatchTarget& to, double scale, std::span<Point3> grad_from,
                            std::span<Point3> grad_to, Kernel value_and_slope) {
  const auto matches = to.matches_from(from);
  const double w = scale / static_cast<double>(from.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const auto [value, slope] = value_and_slope(matches[i].sq_dist);
    sum += value;
    if (slope == 0.0) continue;
    // d sq_dist / d f = 2 (f - t)
    const Point3 g = diff(from[i], to.cloud()[matches[i].id]);
    add_scaled(grad_from, i, 2.0 * w * slope, g);
    add_scaled(grad_to, matches[i].id, -2.0 * w * slope, g);
  }
  return w * sum;
}

struct SquaredKernel {
  std::pair<double, double> operator()(double d2) const { return {d2, 1.0}; }
};

struct BoundedKernel {
  std::pair<double, double> operator()(double d2) const {
    if (d2 == 0.0) return {0.0, 0.0};
    const double d = std::sqrt(d2);
    // d/d(d2) of 1 - e^{-d} = e^{-d} / (2d)
    return {-std::expm1(-d), std::exp(-d) / (2.0 * d)};
  }
};

}  // namespace

void LossWeights::validate() const {
  for (double v : {alpha, beta, delta}) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::InvalidArgument, "loss weights must be finite and >= 0");
  }
}

bool views_partition_complete(const CompletionSample& sample) {
  auto sorted = [](std::vector<Point3> pts) {
    std::sort(pts.begin(), pts.end());
    return pts;
  };
  const auto gt = sorted(sample.gt_complete.points);
  for (const auto& v : sample.views) {
    if (sorted(concat(v.incomplete, v.missing).points) != gt) return false;
  }
  return true;
}

PointCloud completed_view(const CompletionSample& sample, std::size_t i) {
  require_predictions(sample);
  return concat(sample.predictions.at(i), sample.views.at(i).incomplete);
}

double accumulate_chamfer_l2(const MatchTarget& a, const MatchTarget& b, double scale, std::span<Point3> grad_a,
                             std::span<Point3> grad_b) {
  return accumulate_direction(a.cloud(), b, scale, grad_a, grad_b, SquaredKernel{}) +
         accumulate_direction(b.cloud(), a, scale, grad_b, grad_a, SquaredKernel{});
}

double accumulate_density_aware(const MatchTarget& a, const MatchTarget& b, double scale, std::span<Point3> grad_a,
                                std::span<Point3> grad_b) {
  return accumulate_direction(a.cloud(), b, scale, grad_a, grad_b, BoundedKernel{}) +
         accumulate_direction(b.cloud(), a, scale, grad_b, grad_a, BoundedKernel{});
}

double accumulate_chamfer_l2(const PointCloud& a, const PointCloud& b, double scale, std::span<Point3> grad_a,
                             std::span<Point3> grad_b) {
  return accumulate_chamfer_l2(MatchTarget(a), MatchTarget(b), scale, grad_a, grad_b);
}

double accumulate_density_aware(const PointCloud& a, const PointCloud& b, double scale, std::span<Point3> grad_a,
                                std::span<Point3> grad_b) {
  return accumulate_density_aware(MatchTarget(a), MatchTarget(b), scale, grad_a, grad_b);
}

double reconstruction_loss(const PointCloud& pred_missing, const PointCloud& gt_missing) {
  return chamfer_l2(pred_missing, gt_missing);
}

double self_guided_consistency(const CompletionSample& sample) {
  require_views(sample, 2);
  require_predictions(sample);
  const std::size_t n = sample.views.size();
  std::vector<PointCloud> completed;
  completed.reserve(n);
  for (std::size_t i = 0; i < n; ++i) completed.push_back(completed_view(sample, i));
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sum += chamfer_l2(completed[i], completed[j]);
  }
  return 2.0 * sum / static_cast<double>(n * (n - 1));
}

double target_guided_consistency(const CompletionSample& sample) {
  require_views(sample, 1);
  require_predictions(sample);
  double sum = 0.0;
  for (std::size_t i = 0; i < sample.views.size(); ++i) {
    sum += chamfer_l2(completed_view(sample, i), sample.gt_complete);
  }
  return sum / static_cast<double>(sample.views.size());
}

LossBreakdown evaluate_losses(const CompletionSample& sample, const LossWeights& w) {
  w.validate();
  require_views(sample, w.alpha > 0.0 ? 2 : 1);
  require_predictions(sample);
  const std::size_t n = sample.views.size();
  LossBreakdown out;
  if (w.alpha > 0.0) out.self_guided = self_guided_consistency(sample);
  if (w.beta > 0.0) out.target_guided = target_guided_consistency(sample);
  for (std::size_t i = 0; i < n; ++i) {
    out.reconstruction += reconstruction_loss(sample.predictions[i], sample.views[i].missing);
    if (w.delta > 0.0) out.density_aware += density_aware_cd(sample.predictions[i], sample.views[i].missing);
  }
  out.reconstruction /= static_cast<double>(n);
  out.density_aware /= static_cast<double>(n);
  out.total = w.alpha * out.self_guided + w.beta * out.target_guided + out.reconstruction + w.delta * out.density_aware;
  return out;
}

double total_loss(const CompletionSample& sample, const LossWeights& w) { return evaluate_losses(sample, w).total; }

LossGradient loss_gradient(const CompletionSample& sample, const LossWeights& w) {
  w.validate();
  require_views(sample, w.alpha > 0.0 ? 2 : 1);
  require_predictions(sample);
  const std::size_t n = sample.views.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossGradient out;
  out.d_predictions.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.d_predictions[i].assign(sample.predictions[i].size(), Point3{0, 0, 0});

  // Each cloud is indexed once and reused by every term that touches it.
  std::vector<PointCloud> completed;
  std::vector<MatchTarget> completed_targets;
  if (w.alpha > 0.0 || w.beta > 0.0) {
    completed.reserve(n);
    completed_targets.reserve(n);
    for (std::size_t i = 0; i < n; ++i) completed.push_back(completed_view(sample, i));
    for (std::size_t i = 0; i < n; ++i) completed_targets.emplace_back(completed[i]);
  }

  double loss = 0.0;
  if (w.alpha > 0.0) {
    const double scale = w.alpha * 2.0 / static_cast<double>(n * (n - 1));
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        // Completed views hold the prediction first, so the gradient spans
        // (sized to the prediction) cover exactly the trainable prefix.
        loss += accumulate_chamfer_l2(completed_targets[i], completed_targets[j], scale, out.d_predictions[i],
                                      out.d_predictions[j]);
      }
    }
  }
  if (w.beta > 0.0) {
    const MatchTarget gt(sample.gt_complete);
    for (std::size_t i = 0; i < n; ++i) {
      loss += accumulate_chamfer_l2(completed_targets[i], gt, w.beta * inv_n, out.d_predictions[i], {});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const MatchTarget pred(sample.predictions[i]);
    const MatchTarget missing(sample.views[i].missing);
    loss += accumulate_chamfer_l2(pred, missing, inv_n, out.d_predictions[i], {});
    if (w.delta > 0.0) loss += accumulate_density_aware(pred, missing, w.delta * inv_n, out.d_predictions[i], {});
  }
  out.loss = loss;
  return out;
}

}  // namespace concord
