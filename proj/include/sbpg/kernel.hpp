#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbpg/block_vector.hpp"
#include "sbpg/scalar_root.hpp"

namespace sbpg {

// Polynomial reference kernel
//   phi(x) = 0.5*||x||^2 + (delta/r)*||x||^r,  delta >= 0, r >= 2,
// which is 1-strongly convex for every parameter choice. delta = 0 recovers
// the half-squared Euclidean kernel exactly (same floating-point values, not
// just up to roundoff), which is what the Euclidean special cases rely on.
struct KernelSpec {
  double delta = 1e-2;
  double degree = 4.0;

  void validate() const {
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
      throw std::invalid_argument("KernelSpec: delta must be finite and >= 0");
    }
    if (!(degree >= 2.0) || !std::isfinite(degree)) {
      throw std::invalid_argument("KernelSpec: degree must be finite and >= 2");
    }
  }

  bool euclidean() const { return delta == 0.0; }
};

namespace detail {
inline void require_finite(std::span<const double> x, const char* who) {
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite input");
  }
}
}  // namespace detail

inline double phi_value(const KernelSpec& k, std::span<const double> x) {
  detail::require_finite(x, "phi_value");
  double sq = 0.0;
  for (double v : x) sq += v * v;
  if (k.euclidean()) return 0.5 * sq;
  return 0.5 * sq + (k.delta / k.degree) * std::pow(std::sqrt(sq), k.degree);
}

// grad phi(x) = (1 + delta*||x||^(r-2)) * x. At x = 0 the factor is the
// continuous limit: 1 for r > 2, 1 + delta for r = 2 (pow(0, 0) = 1).
inline double gradient_factor(const KernelSpec& k, double norm) {
  if (k.euclidean()) return 1.0;
  return 1.0 + k.delta * std::pow(norm, k.degree - 2.0);
}

inline std::vector<double> phi_gradient(const KernelSpec& k, std::span<const double> x) {
  detail::require_finite(x, "phi_gradient");
  std::vector<double> out(x.begin(), x.end());
  if (k.euclidean()) return out;
  const double f = gradient_factor(k, block_norm(x));
  for (double& v : out) v *= f;
  return out;
}

// Inverse of grad phi: the unique x with grad phi(x) = y is x = s*y where
// s solves delta*||y||^(r-2) * s^(r-1) + s - 1 = 0.
inline std::vector<double> invert_gradient(const KernelSpec& k, std::span<const double> y) {
  detail::require_finite(y, "invert_gradient");
  std::vector<double> out(y.begin(), y.end());
  if (k.euclidean()) return out;
  const double nrm = block_norm(y);
  if (nrm == 0.0) return out;
  const double c = k.delta * std::pow(nrm, k.degree - 2.0);
  const double s = solve_scale({.c = c, .rminus1 = k.degree - 1.0}).t;
  for (double& v : out) v *= s;
  return out;
}

// D_phi(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>, evaluated as
//   0.5*||x - y||^2 + delta * [ (1/r)(||x||^r - ||y||^r) - ||y||^(r-2) <y, x-y> ]
// so that delta = 0 yields exactly the half squared distance.
inline double bregman_distance(const KernelSpec& k, std::span<const double> x,
                               std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("bregman_distance: dimension mismatch");
  }
  detail::require_finite(x, "bregman_distance");
  detail::require_finite(y, "bregman_distance");
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sq += d * d;
  }
  if (k.euclidean()) return 0.5 * sq;

  double nx = 0.0, ny = 0.0, ydiff = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    nx += x[i] * x[i];
    ny += y[i] * y[i];
    ydiff += y[i] * (x[i] - y[i]);
  }
  const double r = k.degree;
  const double tail = (std::pow(std::sqrt(nx), r) - std::pow(std::sqrt(ny), r)) / r -
                      std::pow(std::sqrt(ny), r - 2.0) * ydiff;
  return 0.5 * sq + k.delta * tail;
}

struct AdaptivityReport {
  double max_violation = 0.0;  // max over pairs of |f Bregman gap| - L*D_phi
  std::size_t worst_pair = 0;
  std::size_t pairs_checked = 0;
};

// Reports how badly the two-sided descent inequality
//   |f(x) - f(y) - <grad f(y), x - y>| <= L * D_phi(x, y)
// is violated over the supplied pairs (0 means it held everywhere).
inline AdaptivityReport check_smooth_adaptivity(
    const KernelSpec& k,
    const std::function<double(std::span<const double>)>& f,
    const std::function<std::vector<double>(std::span<const double>)>& grad_f,
    double L,
    std::span<const std::pair<std::vector<double>, std::vector<double>>> pairs) {
  AdaptivityReport rep;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [x, y] = pairs[i];
    const std::vector<double> gy = grad_f(y);
    double lin = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) lin += gy[j] * (x[j] - y[j]);
    const double gap = std::fabs(f(x) - f(y) - lin);
    const double violation = gap - L * bregman_distance(k, x, y);
    if (violation > rep.max_violation) {
      rep.max_violation = violation;
      rep.worst_pair = i;
    }
  }
  rep.pairs_checked = pairs.size();
  if (pairs.empty()) rep.max_violation = 0.0;
  return rep;
}

}  // namespace sbpg
