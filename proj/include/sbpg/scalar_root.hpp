#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sbpg/errors.hpp"

namespace sbpg {

// Scale equation appearing in the mirror-map inversion and the L1 prox:
//   g(t) = c * t^(r-1) + t - 1 = 0,  c >= 0, r >= 2.
// g is increasing and convex on [0, 1] with g(0) = -1 and g(1) = c >= 0,
// so the root is unique and lies in (0, 1].
struct RootQuery {
  double c = 0.0;
  double rminus1 = 3.0;
  double tolerance = 1e-12;  // on |g(t)|
  int max_iterations = 128;
};

struct RootResult {
  double t = 1.0;
  double residual = 0.0;
  int iterations = 0;
};

// Safeguarded Newton from t0 = min(1, c^(-1/(r-1))), which sits at or right
// of the root; a bisection bracket on [0, 1] catches any overshoot. c is
// clamped at 1e300 so g and g' stay representable.
inline RootResult solve_scale(const RootQuery& q) {
  if (!(q.c >= 0.0) || std::isnan(q.c)) {
    throw std::invalid_argument("solve_scale: c must be >= 0");
  }
  if (!(q.rminus1 >= 1.0) || !std::isfinite(q.rminus1)) {
    throw std::invalid_argument("solve_scale: rminus1 must be >= 1");
  }
  if (q.c == 0.0) return {1.0, 0.0, 0};

  const double c = std::min(q.c, 1e300);
  const double rm1 = q.rminus1;
  const auto g = [&](double t) { return c * std::pow(t, rm1) + t - 1.0; };

  double lo = 0.0;              // g(lo) < 0
  double hi = 1.0;              // g(hi) >= 0
  double t = std::min(1.0, std::pow(c, -1.0 / rm1));
  double best_t = t;
  double best_res = std::fabs(g(t));

  for (int it = 1; it <= q.max_iterations; ++it) {
    const double gt = g(t);
    const double res = std::fabs(gt);
    if (res < best_res) {
      best_t = t;
      best_res = res;
    }
    if (res <= q.tolerance) return {t, res, it};

    if (gt > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    const double gp = c * rm1 * std::pow(t, rm1 - 1.0) + 1.0;
    double next = t - gt / gp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  throw NumericError("solve_scale: no convergence", best_t, best_res);
}

}  // namespace sbpg
