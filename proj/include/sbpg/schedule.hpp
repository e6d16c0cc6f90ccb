#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sbpg {

// Stepsize as a function of the 0-based step index k.
//   constant:            alpha0
//   inverse_sqrt_floor:  max(floor, alpha0 / sqrt(1 + k))
//   step_decay:          alpha0 * factor^(#boundaries <= k)
//   cosine:              floor + 0.5*(alpha0 - floor)*(1 + cos(pi*k/total)), clamped past total
struct StepSchedule {
  enum class Kind { constant, inverse_sqrt_floor, step_decay, cosine };

  Kind kind = Kind::constant;
  double alpha0 = 1e-3;
  double floor = 0.0;
  std::vector<long> decay_at;   // step_decay boundaries, ascending
  double decay_factor = 0.1;
  long total_steps = 0;         // cosine horizon

  void validate() const {
    if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) {
      throw std::invalid_argument("StepSchedule: alpha0 must be positive");
    }
    if (!(floor >= 0.0) || !std::isfinite(floor)) {
      throw std::invalid_argument("StepSchedule: floor must be >= 0");
    }
    if (kind == Kind::step_decay) {
      if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
        throw std::invalid_argument("StepSchedule: decay_factor must be in (0, 1]");
      }
      if (!std::is_sorted(decay_at.begin(), decay_at.end())) {
        throw std::invalid_argument("StepSchedule: decay_at must be ascending");
      }
    }
    if (kind == Kind::cosine && total_steps < 1) {
      throw std::invalid_argument("StepSchedule: cosine needs total_steps >= 1");
    }
  }

  double at(long k) const {
    switch (kind) {
      case Kind::constant:
        return alpha0;
      case Kind::inverse_sqrt_floor:
        return std::max(floor, alpha0 / std::sqrt(1.0 + static_cast<double>(k)));
      case Kind::step_decay: {
        const auto hits = std::upper_bound(decay_at.begin(), decay_at.end(), k) - decay_at.begin();
        return alpha0 * std::pow(decay_factor, static_cast<double>(hits));
      }
      case Kind::cosine: {
        const double p = std::min(1.0, static_cast<double>(k) / static_cast<double>(total_steps));
        return floor + 0.5 * (alpha0 - floor) * (1.0 + std::cos(M_PI * p));
      }
    }
    return alpha0;
  }
};

// Minibatch size per step: constant m0, or ceil(c2 * (k+1)^gamma) for the
// growing-batch configuration.
struct BatchSchedule {
  enum class Kind { constant, poly };

  Kind kind = Kind::constant;
  long m0 = 1;
  double c2 = 1.0;
  double gamma = 0.0;

  void validate() const {
    if (kind == Kind::constant && m0 < 1) {
      throw std::invalid_argument("BatchSchedule: m0 must be >= 1");
    }
    if (kind == Kind::poly && (!(c2 >= 1.0) || !(gamma >= 0.0))) {
      throw std::invalid_argument("BatchSchedule: need c2 >= 1 and gamma >= 0");
    }
  }

  long at(long k) const {
    if (kind == Kind::constant) return m0;
    return static_cast<long>(std::ceil(c2 * std::pow(static_cast<double>(k + 1), gamma)));
  }
};

}  // namespace sbpg
