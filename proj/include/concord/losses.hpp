#pragma once

#include <span>
#include <vector>

#include "concord/metrics.hpp"
#include "concord/point_cloud.hpp"

namespace concord {

struct LossWeights {
  double alpha = 0.0;  // self-guided consistency
  double beta = 0.0;   // target-guided consistency
  double delta = 0.0;  // density-aware reconstruction term

  void validate() const;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// One occlusion of a complete cloud: the observed part and the part the
/// network has to predict.
struct ViewPair {
  PointCloud incomplete;
  PointCloud missing;
};

/// One object with n views of it and, once the network has run, one predicted
/// missing set per view (aligned by position).
struct CompletionSample {
  PointCloud gt_complete;
  std::vector<ViewPair> views;
  std::vector<PointCloud> predictions;

  std::size_t view_count() const noexcept { return views.size(); }
};

// Checks incomplete ∪ missing == gt_complete as multisets for every view.
// Disjointness follows from multiset equality of the union.
bool views_partition_complete(const CompletionSample& sample);

/// Prediction i joined with its own incomplete input.
PointCloud completed_view(const CompletionSample& sample, std::size_t i);

double reconstruction_loss(const PointCloud& pred_missing, const PointCloud& gt_missing);

/// Mean pairwise Chamfer distance among the n completed views.
double self_guided_consistency(const CompletionSample& sample);

/// Mean Chamfer distance from each completed view to the complete cloud.
double target_guided_consistency(const CompletionSample& sample);

struct LossBreakdown {
  double self_guided = 0.0;     // 0 when alpha == 0 (not evaluated)
  double target_guided = 0.0;   // 0 when beta == 0
  double reconstruction = 0.0;  // mean over views
  double density_aware = 0.0;   // mean over views; 0 when delta == 0
  double total = 0.0;
};

LossBreakdown evaluate_losses(const CompletionSample& sample, const LossWeights& w);

double total_loss(const CompletionSample& sample, const LossWeights& w);

struct LossGradient {
  double loss = 0.0;
  // d loss / d prediction point, one vector per view, shaped like predictions.
  std::vector<std::vector<Point3>> d_predictions;
};

/// Gradient of total_loss w.r.t. every predicted point with nearest-neighbor
/// assignments frozen at their (lowest-id) argmin. Incomplete points are
/// inputs and receive nothing.
LossGradient loss_gradient(const CompletionSample& sample, const LossWeights& w);

// Building blocks shared with the model's backward pass. Each adds
// scale * CD(a, b) to the return value and scale * dCD into the gradient
// spans; a span shorter than its cloud only covers that cloud's prefix.
double accumulate_chamfer_l2(const PointCloud& a, const PointCloud& b, double scale, std::span<Point3> grad_a,
                             std::span<Point3> grad_b);
double accumulate_density_aware(const PointCloud& a, const PointCloud& b, double scale, std::span<Point3> grad_a,
                                std::span<Point3> grad_b);
double accumulate_chamfer_l2(const MatchTarget& a, const MatchTarget& b, double scale, std::span<Point3> grad_a,
                             std::span<Point3> grad_b);
double accumulate_density_aware(const MatchTarget& a, const MatchTarget& b, double scale, std::span<Point3> grad_a,
                                std::span<Point3> grad_b);

}  // namespace concord
