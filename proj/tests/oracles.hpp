#pragma once

// Brute-force references used by the unit tests and the acceptance suite.
// Nothing here touches the library's index or metric code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "concord/point_cloud.hpp"
#include "concord/rng.hpp"

namespace oracle {

using concord::Point3;
using concord::PointCloud;

inline double sq(const Point3& a, const Point3& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

// Lowest id among the minimizers.
inline std::size_t nearest(const std::vector<Point3>& pts, const Point3& q) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < pts.size(); ++j) {
    if (sq(pts[j], q) < sq(pts[best], q)) best = j;
  }
  return best;
}

template <typename Kernel>
double directional(const PointCloud& a, const PointCloud& b, Kernel k) {
  double s = 0.0;
  for (const auto& p : a.points) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& q : b.points) m = std::min(m, sq(p, q));
    s += k(m);
  }
  return s / static_cast<double>(a.size());
}

inline double cd_l2(const PointCloud& a, const PointCloud& b) {
  const auto k = [](double d2) { return d2; };
  return directional(a, b, k) + directional(b, a, k);
}

inline double cd_l1(const PointCloud& a, const PointCloud& b) {
  const auto k = [](double d2) { return std::sqrt(d2); };
  return 0.5 * (directional(a, b, k) + directional(b, a, k));
}

inline double da_cd(const PointCloud& a, const PointCloud& b) {
  const auto k = [](double d2) { return 1.0 - std::exp(-std::sqrt(d2)); };
  return directional(a, b, k) + directional(b, a, k);
}

inline double f1(const PointCloud& pred, const PointCloud& gt, double tau) {
  const auto frac = [tau](const PointCloud& from, const PointCloud& to) {
    std::size_t hit = 0;
    for (const auto& p : from.points) {
      for (const auto& q : to.points) {
        if (std::sqrt(sq(p, q)) <= tau) {
          ++hit;
          break;
        }
      }
    }
    return static_cast<double>(hit) / static_cast<double>(from.size());
  };
  const double p = frac(pred, gt), r = frac(gt, pred);
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline PointCloud random_cloud(concord::Rng& rng, std::size_t n, double scale = 1.0) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.push_back({rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale)});
  }
  return c;
}

struct GradCheck {
  double max_rel = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates where a kink lies within the stencil
};

inline double rel_err(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
}

// Central differences of f at x[i] with step h, checked against analytic[i].
// A coordinate is skipped when the h and h/2 stencils disagree, which means
// a nearest-neighbor, rectifier or max-pool switch sits inside the stencil.
inline GradCheck check_gradient(std::vector<double>& x, const std::vector<double>& analytic,
                                const std::function<double()>& f, double h = 1e-4) {
  GradCheck out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    const auto central = [&](double step) {
      x[i] = x0 + step;
      const double up = f();
      x[i] = x0 - step;
      const double down = f();
      x[i] = x0;
      return (up - down) / (2 * step);
    };
    const double fd = central(h);
    const double fd_half = central(h / 2);
    if (rel_err(fd, fd_half) > 1e-5) {
      ++out.skipped;
      continue;
    }
    out.max_rel = std::max(out.max_rel, rel_err(analytic[i], fd));
    ++out.checked;
  }
  return out;
}

}  // namespace oracle
