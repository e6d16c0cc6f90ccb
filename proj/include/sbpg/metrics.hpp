#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbpg/block_vector.hpp"
#include "sbpg/kernel.hpp"
#include "sbpg/problem.hpp"
#include "sbpg/prox.hpp"

namespace sbpg {

// Bregman gradient mapping at stepsize alpha:
//   G_alpha(x) = (x - prox step of x along grad) / alpha.
// Zero exactly at stationary points of F + lambda1*||.||_1; with delta = 0,
// lambda1 = 0 it reduces to the gradient itself.
inline BlockVector bregman_gradient_mapping(const BlockVector& x, const BlockVector& grad,
                                            double alpha, double lambda1,
                                            std::span<const KernelSpec> kernels) {
  BlockVector out = x;
  out.axpy(-1.0, bregman_prox_step(x, grad, alpha, lambda1, kernels));
  out.scale(1.0 / alpha);
  return out;
}

// Same map driven by a stochastic estimate instead of the full gradient.
inline BlockVector stochastic_gradient_mapping(const BlockVector& x, const BlockVector& estimate,
                                               double alpha, double lambda1,
                                               std::span<const KernelSpec> kernels) {
  return bregman_gradient_mapping(x, estimate, alpha, lambda1, kernels);
}

struct StationarityReport {
  double grad_map_norm = std::numeric_limits<double>::quiet_NaN();
  double rel_obj_gap = std::numeric_limits<double>::quiet_NaN();
  double epsilon_k = std::numeric_limits<double>::quiet_NaN();
  double alpha_used = 1.0;
};

// epsilon_k = max( ||G_alpha(x)||, (Phi(x) - Phi*) / (1 + Phi*) ), the
// two-part stationarity measure used by the QIP experiments (alpha = 1 by
// convention). Without a reference objective the gap term is dropped.
inline StationarityReport stationarity_from_gradient(const BlockVector& x,
                                                     const BlockVector& full_grad,
                                                     double objective,
                                                     std::optional<double> obj_star,
                                                     double lambda1,
                                                     std::span<const KernelSpec> kernels,
                                                     double alpha = 1.0) {
  StationarityReport rep;
  rep.alpha_used = alpha;
  rep.grad_map_norm = bregman_gradient_mapping(x, full_grad, alpha, lambda1, kernels).norm();
  rep.epsilon_k = rep.grad_map_norm;
  if (obj_star.has_value()) {
    rep.rel_obj_gap = (objective - *obj_star) / (1.0 + *obj_star);
    rep.epsilon_k = std::max(rep.grad_map_norm, rep.rel_obj_gap);
  }
  return rep;
}

inline StationarityReport stationarity_epsilon(const BlockVector& x, const Problem& problem,
                                               std::optional<double> obj_star, double lambda1,
                                               std::span<const KernelSpec> kernels,
                                               double alpha = 1.0) {
  return stationarity_from_gradient(x, problem.full_gradient(x), problem.objective(x),
                                    obj_star, lambda1, kernels, alpha);
}

enum class RunStatus { converged, budget_exhausted, collapsed };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::budget_exhausted: return "budget_exhausted";
    case RunStatus::collapsed: return "collapsed";
  }
  return "unknown";
}

// One sampled point of a run. epsilon_k / grad_map_norm are NaN on records
// where stationarity was not (or could not be) evaluated.
struct TraceRecord {
  long k = 0;
  double wall_ms = 0.0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double epsilon_k = std::numeric_limits<double>::quiet_NaN();
  double grad_map_norm = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> block_x_norms;
  std::vector<double> block_v_norms;
};

// Records are strictly increasing in k: the initial state, every check_every
// steps, and the terminal state. status describes how the run ended.
struct RunTrace {
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::budget_exhausted;
  long steps = 0;
  double wall_ms = 0.0;
  std::string config_echo;

  const TraceRecord& final_record() const { return records.back(); }
};

}  // namespace sbpg
