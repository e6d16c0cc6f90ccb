#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sbpg/block_vector.hpp"
#include "sbpg/format.hpp"
#include "sbpg/kernel.hpp"
#include "sbpg/metrics.hpp"
#include "sbpg/problem.hpp"
#include "sbpg/prox.hpp"
#include "sbpg/rng.hpp"
#include "sbpg/schedule.hpp"

namespace sbpg {

// Iterates whose norm exceeds this are treated as diverged.
inline constexpr double kCollapseNorm = 1e12;

enum class Method { spg, sbpg, msbpg, msbpg_wd };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::spg: return "spg";
    case Method::sbpg: return "sbpg";
    case Method::msbpg: return "msbpg";
    case Method::msbpg_wd: return "msbpg_wd";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  if (name == "spg") return Method::spg;
  if (name == "sbpg") return Method::sbpg;
  if (name == "msbpg") return Method::msbpg;
  if (name == "msbpg_wd") return Method::msbpg_wd;
  throw std::invalid_argument("unknown method: " + std::string(name));
}

// Momentum estimate of the smooth gradient, two conventions:
//   smae:           v <- (1-beta)*v + beta*g,  direction = v
//   bias_corrected: v <- beta*v + (1-beta)*g,  direction = v / (1 - beta^(k+1))
// The coupled schedule ties beta to the stepsize, beta_k = min(1, alpha_k/couple_c),
// and is defined for the smae convention only (alpha_0 = couple_c makes the
// first direction equal the first estimate exactly).
struct MomentumSpec {
  enum class Convention { smae, bias_corrected };
  enum class BetaSchedule { constant, coupled };

  Convention convention = Convention::bias_corrected;
  BetaSchedule beta_schedule = BetaSchedule::constant;
  double beta = 0.9;
  double couple_c = 1e-3;
  bool bias_correction = true;

  void validate() const {
    if (beta_schedule == BetaSchedule::coupled) {
      if (convention != Convention::smae) {
        throw std::invalid_argument("MomentumSpec: coupled beta requires the smae convention");
      }
      if (!(couple_c > 0.0) || !std::isfinite(couple_c)) {
        throw std::invalid_argument("MomentumSpec: couple_c must be positive");
      }
      return;
    }
    if (!std::isfinite(beta)) throw std::invalid_argument("MomentumSpec: beta must be finite");
    if (convention == Convention::smae) {
      if (!(beta > 0.0 && beta < 1.0)) {
        throw std::invalid_argument("MomentumSpec: smae beta must lie in (0, 1)");
      }
    } else if (!(beta >= 0.0 && beta < 1.0)) {
      throw std::invalid_argument("MomentumSpec: bias_corrected beta must lie in [0, 1)");
    }
  }

  double beta_at(long k, double alpha_k) const {
    (void)k;
    if (beta_schedule == BetaSchedule::coupled) return std::min(1.0, alpha_k / couple_c);
    return beta;
  }
};

struct OptimizerConfig {
  Method method = Method::sbpg;
  std::vector<KernelSpec> kernels = {KernelSpec{}};  // one shared spec or one per block
  StepSchedule schedule;
  MomentumSpec momentum;
  double lambda1 = 0.0;
  double lambda2 = 0.0;  // decoupled weight decay, msbpg_wd only
  BatchSchedule batch;
  std::uint64_t seed = 0;
  bool wall_times = false;  // wall_ms fields stay 0 unless opted in

  void validate() const {
    schedule.validate();
    batch.validate();
    if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) {
      throw std::invalid_argument("OptimizerConfig: lambda1 must be >= 0");
    }
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) {
      throw std::invalid_argument("OptimizerConfig: lambda2 must be >= 0");
    }
    if (lambda2 != 0.0 && method != Method::msbpg_wd) {
      throw std::invalid_argument("OptimizerConfig: lambda2 requires msbpg_wd");
    }
    if (kernels.empty()) throw std::invalid_argument("OptimizerConfig: kernels must not be empty");
    for (const KernelSpec& k : kernels) k.validate();
    if (method == Method::spg) {
      for (const KernelSpec& k : kernels) {
        if (!k.euclidean()) {
          throw std::invalid_argument("OptimizerConfig: spg requires Euclidean kernels");
        }
      }
    }
    if (method == Method::msbpg || method == Method::msbpg_wd) momentum.validate();
  }
};

struct OptimizerState {
  BlockVector x;
  BlockVector v;  // momentum buffer, zero until the first msbpg step
  long k = 0;
  Rng rng;
};

// max_steps caps the number of optimizer steps; time_limit_s < 0 (or unset)
// disables the wall clock cap, = 0 exhausts the budget before the first step.
// target_epsilon is checked on every recorded trace point.
struct StoppingRule {
  long max_steps = 10000;
  std::optional<double> time_limit_s{};
  std::optional<double> target_epsilon{};
  std::optional<double> objective_star{};  // reference value for the gap term
  long check_every = 50;
};

namespace detail {

// v <- keep*v + take*g, blockwise.
inline void momentum_accumulate(BlockVector& v, const BlockVector& g, double keep, double take) {
  v.require_same_structure(g);
  for (std::size_t b = 0; b < v.blocks.size(); ++b) {
    auto& vb = v.blocks[b].values;
    const auto& gb = g.blocks[b].values;
    for (std::size_t i = 0; i < vb.size(); ++i) vb[i] = keep * vb[i] + take * gb[i];
  }
}

}  // namespace detail

// Updates the momentum buffer with the estimate g observed at step k and
// returns the direction driving the prox step.
inline BlockVector momentum_direction(const MomentumSpec& m, long k, double alpha,
                                      BlockVector& v, const BlockVector& g) {
  const double beta = m.beta_at(k, alpha);
  if (m.convention == MomentumSpec::Convention::smae) {
    detail::momentum_accumulate(v, g, 1.0 - beta, beta);
    return v;
  }
  detail::momentum_accumulate(v, g, beta, 1.0 - beta);
  BlockVector dir = v;
  if (m.bias_correction) {
    const double denom = 1.0 - std::pow(beta, static_cast<double>(k + 1));
    dir.scale(1.0 / denom);
  }
  return dir;
}

// One optimizer transition at stepsize alpha from the gradient estimate g
// observed at st.x. Increments st.k. The spg branch is the Euclidean special
// case written without the kernel machinery; it reproduces the generic path
// with delta = 0 bit for bit.
inline void apply_step(const OptimizerConfig& cfg, OptimizerState& st, const BlockVector& g,
                       double alpha) {
  switch (cfg.method) {
    case Method::spg: {
      st.x.require_same_structure(g);
      BlockVector next = BlockVector::zeros_like(st.x);
      const double tau = alpha * cfg.lambda1;
      for (std::size_t b = 0; b < st.x.blocks.size(); ++b) {
        const auto& xb = st.x.blocks[b].values;
        const auto& gb = g.blocks[b].values;
        auto& ob = next.blocks[b].values;
        for (std::size_t i = 0; i < xb.size(); ++i) {
          ob[i] = soft_threshold(alpha * gb[i] - xb[i], tau) * -1.0;
        }
      }
      st.x = std::move(next);
      break;
    }
    case Method::sbpg:
      st.x = bregman_prox_step(st.x, g, alpha, cfg.lambda1, cfg.kernels);
      break;
    case Method::msbpg: {
      const BlockVector dir = momentum_direction(cfg.momentum, st.k, alpha, st.v, g);
      st.x = bregman_prox_step(st.x, dir, alpha, cfg.lambda1, cfg.kernels);
      break;
    }
    case Method::msbpg_wd: {
      const BlockVector dir = momentum_direction(cfg.momentum, st.k, alpha, st.v, g);
      BlockVector next = bregman_prox_step(st.x, dir, alpha, cfg.lambda1, cfg.kernels);
      if (cfg.lambda2 != 0.0) next.axpy(-alpha * cfg.lambda2, st.x);
      st.x = std::move(next);
      break;
    }
  }
  ++st.k;
}

inline std::string describe(const OptimizerConfig& cfg) {
  std::ostringstream os;
  os << "method=" << method_name(cfg.method);
  os << " lambda1=" << format_double(cfg.lambda1);
  if (cfg.method == Method::msbpg_wd) os << " lambda2=" << format_double(cfg.lambda2);
  os << " kernels=[";
  for (std::size_t i = 0; i < cfg.kernels.size(); ++i) {
    if (i != 0) os << ";";
    os << "delta=" << format_double(cfg.kernels[i].delta)
       << ",r=" << format_double(cfg.kernels[i].degree);
  }
  os << "]";
  os << " step=";
  switch (cfg.schedule.kind) {
    case StepSchedule::Kind::constant:
      os << "constant(" << format_double(cfg.schedule.alpha0) << ")";
      break;
    case StepSchedule::Kind::inverse_sqrt_floor:
      os << "inverse_sqrt(" << format_double(cfg.schedule.alpha0)
         << ",floor=" << format_double(cfg.schedule.floor) << ")";
      break;
    case StepSchedule::Kind::step_decay:
      os << "step_decay(" << format_double(cfg.schedule.alpha0)
         << ",factor=" << format_double(cfg.schedule.decay_factor)
         << ",cuts=" << cfg.schedule.decay_at.size() << ")";
      break;
    case StepSchedule::Kind::cosine:
      os << "cosine(" << format_double(cfg.schedule.alpha0)
         << ",floor=" << format_double(cfg.schedule.floor)
         << ",total=" << cfg.schedule.total_steps << ")";
      break;
  }
  if (cfg.batch.kind == BatchSchedule::Kind::constant) {
    os << " batch=" << cfg.batch.m0;
  } else {
    os << " batch=ceil(" << format_double(cfg.batch.c2) << "*(k+1)^"
       << format_double(cfg.batch.gamma) << ")";
  }
  if (cfg.method == Method::msbpg || cfg.method == Method::msbpg_wd) {
    os << " momentum="
       << (cfg.momentum.convention == MomentumSpec::Convention::smae ? "smae" : "bias_corrected");
    if (cfg.momentum.beta_schedule == MomentumSpec::BetaSchedule::coupled) {
      os << " beta=coupled(c=" << format_double(cfg.momentum.couple_c) << ")";
    } else {
      os << " beta=" << format_double(cfg.momentum.beta);
      if (cfg.momentum.convention == MomentumSpec::Convention::bias_corrected) {
        os << " bias_correction=" << (cfg.momentum.bias_correction ? "on" : "off");
      }
    }
  }
  os << " seed=" << cfg.seed;
  return os.str();
}

// Runs cfg on the problem from x0 until the stopping rule fires. Every
// recorded point carries the full objective and the alpha = 1 stationarity
// measure; records on collapsed iterates keep NaN metrics so a diverging run
// always ends with a trace instead of an exception.
inline RunTrace run(const Problem& problem, const BlockVector& x0, const OptimizerConfig& cfg,
                    const StoppingRule& stop) {
  cfg.validate();
  if (stop.max_steps < 0) throw std::invalid_argument("StoppingRule: max_steps must be >= 0");
  if (stop.check_every < 1) throw std::invalid_argument("StoppingRule: check_every must be >= 1");

  RunTrace trace;
  trace.config_echo = describe(cfg);

  OptimizerState st{x0, BlockVector::zeros_like(x0), 0, Rng::derive(cfg.seed, kStreamRun)};

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed_s = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };
  auto wall_ms = [&] { return cfg.wall_times ? 1e3 * elapsed_s() : 0.0; };
  const bool time_limited = stop.time_limit_s.has_value() && *stop.time_limit_s >= 0.0;

  long last_recorded = -1;
  auto append_record = [&]() -> const TraceRecord& {
    TraceRecord rec;
    rec.k = st.k;
    rec.wall_ms = wall_ms();
    if (st.x.is_finite() && st.x.norm() <= kCollapseNorm) {
      rec.objective = problem.objective(st.x);
      if (std::isfinite(rec.objective)) {
        const BlockVector fg = problem.full_gradient(st.x);
        if (fg.is_finite()) {
          const StationarityReport rep = stationarity_from_gradient(
              st.x, fg, rec.objective, stop.objective_star, cfg.lambda1, cfg.kernels, 1.0);
          rec.grad_map_norm = rep.grad_map_norm;
          rec.epsilon_k = rep.epsilon_k;
        }
      }
    }
    rec.block_x_norms = st.x.block_norms();
    rec.block_v_norms = st.v.block_norms();
    trace.records.push_back(std::move(rec));
    last_recorded = st.k;
    return trace.records.back();
  };
  auto target_met = [&](const TraceRecord& rec) {
    return stop.target_epsilon.has_value() && std::isfinite(rec.epsilon_k) &&
           rec.epsilon_k <= *stop.target_epsilon;
  };

  RunStatus status = RunStatus::budget_exhausted;
  bool done = false;

  const TraceRecord& rec0 = append_record();
  if (!std::isfinite(rec0.objective)) {
    status = RunStatus::collapsed;
    done = true;
  } else if (target_met(rec0)) {
    status = RunStatus::converged;
    done = true;
  }

  while (!done) {
    if (st.k >= stop.max_steps) break;
    if (time_limited && elapsed_s() >= *stop.time_limit_s) break;

    const long m = cfg.batch.at(st.k);
    const double alpha = cfg.schedule.at(st.k);
    const BlockVector g = problem.minibatch_gradient(st.x, m, st.rng);
    if (!g.is_finite()) {
      status = RunStatus::collapsed;
      append_record();
      break;
    }

    apply_step(cfg, st, g, alpha);

    if (!st.x.is_finite() || st.x.norm() > kCollapseNorm) {
      status = RunStatus::collapsed;
      append_record();
      break;
    }
    if (st.k % stop.check_every == 0 || st.k >= stop.max_steps) {
      const TraceRecord& rec = append_record();
      if (!std::isfinite(rec.objective)) {
        status = RunStatus::collapsed;
        break;
      }
      if (target_met(rec)) {
        status = RunStatus::converged;
        break;
      }
    }
  }

  if (last_recorded != st.k) append_record();
  trace.status = status;
  trace.steps = st.k;
  trace.wall_ms = wall_ms();
  return trace;
}

}  // namespace sbpg
