#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace concord {

struct AdamWHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;

  friend bool operator==(const AdamWHyper&, const AdamWHyper&) = default;
};

struct OptimizerState {
  AdamWHyper hyper;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;

  OptimizerState() = default;
  OptimizerState(std::size_t size, AdamWHyper h)
      : hyper(h), first_moment(size, 0.0), second_moment(size, 0.0) {}

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

/// One AdamW update with decoupled weight decay:
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * p
void adamw_step(OptimizerState& state, std::span<double> params, std::span<const double> grads, double lr);

/// Cosine annealing from lr_max at t = 0 to lr_min at t = total; t past the
/// end stays at lr_min.
double cosine_lr(std::uint64_t t, std::uint64_t total, double lr_max, double lr_min);

}  // namespace concord
