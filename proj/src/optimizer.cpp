#include "concord/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "concord/error.hpp"

namespace concord {

void adamw_step(OptimizerState& state, std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer state, parameters and gradients differ in size");
  }
  const auto& h = state.hyper;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = h.beta1 * m + (1.0 - h.beta1) * grads[i];
    v = h.beta2 * v + (1.0 - h.beta2) * grads[i] * grads[i];
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    params[i] -= lr * (m_hat / (std::sqrt(v_hat) + h.eps)) + lr * h.weight_decay * params[i];
  }
}

double cosine_lr(std::uint64_t t, std::uint64_t total, double lr_max, double lr_min) {
  if (total < 1) throw Error(ErrorCode::InvalidArgument, "schedule length must be >= 1");
  if (t >= total) return lr_min;
  const double phase = std::numbers::pi * static_cast<double>(t) / static_cast<double>(total);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

}  // namespace concord
