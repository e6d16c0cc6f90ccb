#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sbpg/block_vector.hpp"
#include "sbpg/format.hpp"
#include "sbpg/kernel.hpp"
#include "sbpg/metrics.hpp"
#include "sbpg/mlp.hpp"
#include "sbpg/optimizer.hpp"
#include "sbpg/qip.hpp"
#include "sbpg/rng.hpp"
#include "sbpg/schedule.hpp"

namespace sbpg {

// One entry of a --methods list. Labels keep the user's spelling:
//   spg                   Euclidean proximal SGD
//   sbpg[:delta[:r]]      Bregman step, default delta=1, r=4
//   msbpg[:delta[:r]]     momentum variant
//   msbpg_wd[:delta[:r]]  momentum + decoupled weight decay
//   spg_momentum          alias for msbpg_wd with the Euclidean kernel
struct MethodConfig {
  std::string label;
  Method method = Method::sbpg;
  KernelSpec kernel;
};

inline MethodConfig parse_method_config(std::string_view text) {
  MethodConfig mc;
  mc.label = std::string(text);

  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(':', pos);
    if (next == std::string_view::npos) {
      parts.emplace_back(text.substr(pos));
      break;
    }
    parts.emplace_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
  if (parts.empty() || parts[0].empty()) {
    throw std::invalid_argument("method spec must start with a method name");
  }
  if (parts.size() > 3) throw std::invalid_argument("method spec: too many ':' fields");

  if (parts[0] == "spg_momentum") {
    if (parts.size() > 1) {
      throw std::invalid_argument("spg_momentum does not take kernel parameters");
    }
    mc.method = Method::msbpg_wd;
    mc.kernel = KernelSpec{.delta = 0.0, .degree = 2.0};
    return mc;
  }

  mc.method = parse_method(parts[0]);
  if (mc.method == Method::spg) {
    mc.kernel = KernelSpec{.delta = 0.0, .degree = 2.0};
    if (parts.size() > 1) {
      throw std::invalid_argument("spg is Euclidean; use sbpg:<delta>[:r] for a kernel");
    }
    return mc;
  }
  mc.kernel = KernelSpec{.delta = 1.0, .degree = 4.0};
  if (parts.size() > 1) mc.kernel.delta = std::stod(parts[1]);
  if (parts.size() > 2) mc.kernel.degree = std::stod(parts[2]);
  mc.kernel.validate();
  return mc;
}

inline std::vector<MethodConfig> parse_method_list(std::string_view csv) {
  std::vector<MethodConfig> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t next = csv.find(',', pos);
    const std::string_view item =
        next == std::string_view::npos ? csv.substr(pos) : csv.substr(pos, next - pos);
    if (!item.empty()) out.push_back(parse_method_config(item));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  if (out.empty()) throw std::invalid_argument("method list is empty");
  return out;
}

// Shared experiment knobs. seed is the base seed; trial t draws its instance,
// its init, and its run stream from seed + t, so every method and grid point
// inside a trial sees the same data, the same starting point (up to the radius
// scaling), and the same minibatch sequence.
struct ExperimentSpec {
  long d = 100;
  long n = 5000;
  double density = 0.05;
  double lambda1 = 1e-3;
  std::uint64_t seed = 7;
  long trials = 10;
  long step_limit = 200000;
  double time_limit_s = 30.0;    // < 0 disables the wall clock cap
  long check_every = 50;
  double target_epsilon = 1e-2;  // <= 0 or non-finite disables the target
  double alpha0 = 1e-3;
  double floor = 1e-4;           // inverse-sqrt schedule floor (converge)
  double radius = 1e-2;          // init ball radius where it is not the grid
  long batch_m = 1;
  double lambda2 = 0.0;          // decay for msbpg_wd methods
  MomentumSpec momentum;
  int jobs = 1;
  bool wall_times = false;
  bool keep_traces = false;
  std::vector<MethodConfig> methods;
  std::vector<double> grid;      // empty picks the per-experiment default

  // mlp_train only
  std::vector<long> mlp_dims = {8, 16, 1};
  long mlp_count = 256;
  double mlp_noise = 1e-2;
  double mlp_eps = 0.1;
  double mlp_init_scale = 1.0;
};

struct TrialRow {
  std::string experiment;
  std::string method;
  double kernel_delta = 0.0;
  double kernel_r = 2.0;
  double grid_value = std::numeric_limits<double>::quiet_NaN();
  long trial = 0;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::budget_exhausted;
  long steps = 0;
  double wall_ms = 0.0;
  double final_epsilon = std::numeric_limits<double>::quiet_NaN();
  double final_objective = std::numeric_limits<double>::quiet_NaN();
};

// Aggregate over the trials of one (method, grid point) cell. A cell counts
// as convergent only when a strict majority of its trials converged.
struct GridSummary {
  std::string method;
  double grid_value = std::numeric_limits<double>::quiet_NaN();
  long trials = 0;
  long converged = 0;
  long collapsed = 0;
  double median_final_epsilon = std::numeric_limits<double>::quiet_NaN();
  bool convergent = false;
};

// Largest probed stepsize a (method, trial) pair survives without collapse;
// threshold 0 means even the smallest grid point collapsed.
struct ThresholdEntry {
  std::string method;
  long trial = 0;
  double threshold = 0.0;
};

struct SweepResult {
  std::string experiment;
  std::vector<TrialRow> rows;
  std::vector<GridSummary> summaries;
  std::vector<ThresholdEntry> threshold_entries;
  std::vector<std::pair<std::string, double>> safe_thresholds;  // per-method median
  std::vector<RunTrace> traces;
  std::vector<std::string> trace_labels;
};

inline std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw std::invalid_argument("log_grid: need 0 < lo < hi and count >= 2");
  }
  std::vector<double> g(count);
  const double llo = std::log10(lo);
  const double lhi = std::log10(hi);
  for (int i = 0; i < count; ++i) {
    g[i] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) / (count - 1));
  }
  return g;
}

inline std::vector<double> default_stepsize_grid() { return log_grid(1e-5, 1.0, 13); }
inline std::vector<double> default_radius_grid() { return log_grid(1e-2, 1e2, 13); }
inline std::vector<double> default_threshold_grid() { return log_grid(1e-6, 1e1, 15); }

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  if (v.size() % 2 == 1) return v[mid];
  return 0.5 * (v[mid - 1] + v[mid]);
}

namespace detail {

// Runs fn(0..count-1) on up to jobs workers. Each index owns its output slot,
// so results do not depend on scheduling. The first worker exception rethrows
// on the caller thread.
inline void parallel_for(int jobs, std::size_t count, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

inline bool target_enabled(const ExperimentSpec& spec) {
  return std::isfinite(spec.target_epsilon) && spec.target_epsilon > 0.0;
}

inline OptimizerConfig make_config(const ExperimentSpec& spec, const MethodConfig& mc,
                                   const StepSchedule& schedule, std::uint64_t seed) {
  OptimizerConfig cfg;
  cfg.method = mc.method;
  cfg.kernels = {mc.kernel};
  cfg.schedule = schedule;
  cfg.momentum = spec.momentum;
  cfg.lambda1 = spec.lambda1;
  cfg.lambda2 = mc.method == Method::msbpg_wd ? spec.lambda2 : 0.0;
  cfg.batch.kind = BatchSchedule::Kind::constant;
  cfg.batch.m0 = spec.batch_m;
  cfg.seed = seed;
  cfg.wall_times = spec.wall_times;
  return cfg;
}

inline StoppingRule make_stop(const ExperimentSpec& spec, std::optional<double> obj_star,
                              bool with_target) {
  StoppingRule stop;
  stop.max_steps = spec.step_limit;
  if (spec.time_limit_s >= 0.0) stop.time_limit_s = spec.time_limit_s;
  if (with_target && target_enabled(spec)) stop.target_epsilon = spec.target_epsilon;
  stop.objective_star = obj_star;
  stop.check_every = spec.check_every;
  return stop;
}

inline TrialRow make_row(const std::string& experiment, const MethodConfig& mc, double grid_value,
                         long trial, std::uint64_t seed, const RunTrace& trace) {
  TrialRow row;
  row.experiment = experiment;
  row.method = mc.label;
  row.kernel_delta = mc.kernel.delta;
  row.kernel_r = mc.kernel.degree;
  row.grid_value = grid_value;
  row.trial = trial;
  row.seed = seed;
  row.status = trace.status;
  row.steps = trace.steps;
  row.wall_ms = trace.wall_ms;
  row.final_epsilon = trace.final_record().epsilon_k;
  row.final_objective = trace.final_record().objective;
  return row;
}

inline GridSummary summarize_cell(const std::string& method, double grid_value,
                                  std::span<const TrialRow> rows, std::size_t first,
                                  std::size_t stride, std::size_t count) {
  GridSummary s;
  s.method = method;
  s.grid_value = grid_value;
  std::vector<double> eps;
  for (std::size_t t = 0; t < count; ++t) {
    const TrialRow& row = rows[first + t * stride];
    ++s.trials;
    if (row.status == RunStatus::converged) ++s.converged;
    if (row.status == RunStatus::collapsed) ++s.collapsed;
    if (std::isfinite(row.final_epsilon)) eps.push_back(row.final_epsilon);
  }
  s.median_final_epsilon = median(std::move(eps));
  s.convergent = 2 * s.converged > s.trials;
  return s;
}

inline std::string trace_label(const MethodConfig& mc, long trial, double grid_value) {
  std::ostringstream os;
  os << mc.label << " trial" << trial;
  if (std::isfinite(grid_value)) os << " @" << format_double(grid_value);
  return os.str();
}

}  // namespace detail

// Convergence runs on fresh instances: inverse-sqrt stepsize with floor,
// fixed init radius, one row per (method, trial).
inline SweepResult exp_converge(const ExperimentSpec& spec) {
  if (spec.methods.empty()) throw std::invalid_argument("exp_converge: no methods");
  if (spec.trials < 1) throw std::invalid_argument("exp_converge: trials must be >= 1");

  SweepResult res;
  res.experiment = "converge";

  std::vector<QipProblem> problems;
  std::vector<BlockVector> inits;
  problems.reserve(spec.trials);
  inits.reserve(spec.trials);
  for (long t = 0; t < spec.trials; ++t) {
    problems.emplace_back(qip_generate(spec.d, spec.n, spec.density, spec.lambda1, spec.seed + t));
    Rng rng = Rng::derive(spec.seed + t, kStreamInit);
    inits.push_back(BlockVector::single("x", ball_point(spec.d, spec.radius, rng)));
  }

  StepSchedule schedule;
  schedule.kind = StepSchedule::Kind::inverse_sqrt_floor;
  schedule.alpha0 = spec.alpha0;
  schedule.floor = spec.floor;
  const std::size_t n_methods = spec.methods.size();
  const std::size_t n_trials = static_cast<std::size_t>(spec.trials);
  const std::size_t tasks = n_methods * n_trials;
  res.rows.resize(tasks);
  if (spec.keep_traces) {
    res.traces.resize(tasks);
    res.trace_labels.resize(tasks);
  }

  detail::parallel_for(spec.jobs, tasks, [&](std::size_t id) {
    const std::size_t m = id / n_trials;
    const long t = static_cast<long>(id % n_trials);
    const MethodConfig& mc = spec.methods[m];
    const std::uint64_t seed = spec.seed + t;
    const OptimizerConfig cfg = detail::make_config(spec, mc, schedule, seed);
    const StoppingRule stop =
        detail::make_stop(spec, problems[t].reference_objective(), /*with_target=*/true);
    RunTrace trace = run(problems[t], inits[t], cfg, stop);
    res.rows[id] = detail::make_row(res.experiment, mc, std::numeric_limits<double>::quiet_NaN(),
                                    t, seed, trace);
    if (spec.keep_traces) {
      res.trace_labels[id] =
          detail::trace_label(mc, t, std::numeric_limits<double>::quiet_NaN());
      res.traces[id] = std::move(trace);
    }
  });

  for (std::size_t m = 0; m < n_methods; ++m) {
    res.summaries.push_back(detail::summarize_cell(spec.methods[m].label,
                                                   std::numeric_limits<double>::quiet_NaN(),
                                                   res.rows, m * n_trials, 1, n_trials));
  }
  return res;
}

namespace detail {

// Shared body of the stepsize / radius sweeps. The grid is ascending; rows
// come out ordered by (grid point, method, trial).
inline SweepResult run_grid_sweep(const ExperimentSpec& spec, const std::string& experiment,
                                  std::vector<double> grid, bool grid_is_stepsize) {
  if (spec.methods.empty()) throw std::invalid_argument(experiment + ": no methods");
  if (spec.trials < 1) throw std::invalid_argument(experiment + ": trials must be >= 1");
  if (grid.empty()) throw std::invalid_argument(experiment + ": empty grid");
  std::sort(grid.begin(), grid.end());
  for (double g : grid) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw std::invalid_argument(experiment + ": grid values must be positive");
    }
  }

  SweepResult res;
  res.experiment = experiment;

  std::vector<QipProblem> problems;
  std::vector<std::vector<double>> unit_inits;  // unit-radius ball points
  problems.reserve(spec.trials);
  unit_inits.reserve(spec.trials);
  for (long t = 0; t < spec.trials; ++t) {
    problems.emplace_back(qip_generate(spec.d, spec.n, spec.density, spec.lambda1, spec.seed + t));
    Rng rng = Rng::derive(spec.seed + t, kStreamInit);
    unit_inits.push_back(ball_point(spec.d, 1.0, rng));
  }

  const std::size_t n_methods = spec.methods.size();
  const std::size_t n_trials = static_cast<std::size_t>(spec.trials);
  const std::size_t n_grid = grid.size();
  const std::size_t tasks = n_grid * n_methods * n_trials;
  res.rows.resize(tasks);
  if (spec.keep_traces) {
    res.traces.resize(tasks);
    res.trace_labels.resize(tasks);
  }

  parallel_for(spec.jobs, tasks, [&](std::size_t id) {
    const std::size_t g = id / (n_methods * n_trials);
    const std::size_t m = (id / n_trials) % n_methods;
    const long t = static_cast<long>(id % n_trials);
    const MethodConfig& mc = spec.methods[m];
    const std::uint64_t seed = spec.seed + t;

    const double radius = grid_is_stepsize ? spec.radius : grid[g];
    StepSchedule schedule;
    if (grid_is_stepsize) {
      schedule.kind = StepSchedule::Kind::inverse_sqrt_floor;
      schedule.alpha0 = grid[g];
      schedule.floor = spec.floor;
    } else {
      schedule.alpha0 = spec.alpha0;
    }

    std::vector<double> x0 = unit_inits[t];
    for (double& v : x0) v *= radius;

    const OptimizerConfig cfg = make_config(spec, mc, schedule, seed);
    const StoppingRule stop =
        make_stop(spec, problems[t].reference_objective(), /*with_target=*/true);
    RunTrace trace = run(problems[t], BlockVector::single("x", std::move(x0)), cfg, stop);
    res.rows[id] = make_row(experiment, mc, grid[g], t, seed, trace);
    if (spec.keep_traces) {
      res.trace_labels[id] = trace_label(mc, t, grid[g]);
      res.traces[id] = std::move(trace);
    }
  });

  for (std::size_t m = 0; m < n_methods; ++m) {
    for (std::size_t g = 0; g < n_grid; ++g) {
      res.summaries.push_back(summarize_cell(spec.methods[m].label, grid[g], res.rows,
                                             (g * n_methods + m) * n_trials, 1, n_trials));
    }
  }
  return res;
}

}  // namespace detail

// Robustness sweep over initial stepsizes: each grid value seeds an
// inverse-sqrt schedule clipped below by spec.floor.
inline SweepResult exp_sweep_stepsize(const ExperimentSpec& spec) {
  return detail::run_grid_sweep(spec, "sweep_stepsize",
                                spec.grid.empty() ? default_stepsize_grid() : spec.grid,
                                /*grid_is_stepsize=*/true);
}

// Constant-stepsize robustness sweep over the init radius grid.
inline SweepResult exp_sweep_radius(const ExperimentSpec& spec) {
  return detail::run_grid_sweep(spec, "sweep_radius",
                                spec.grid.empty() ? default_radius_grid() : spec.grid,
                                /*grid_is_stepsize=*/false);
}

// Largest constant stepsize each method survives. Collapse is monotone in the
// stepsize for these dynamics, so each (method, trial) pair bisects the sorted
// grid: probe the ends, then narrow the stable/collapsing bracket. Rows record
// every probe actually run.
inline SweepResult exp_safe_threshold(const ExperimentSpec& spec) {
  if (spec.methods.empty()) throw std::invalid_argument("exp_safe_threshold: no methods");
  if (spec.trials < 1) throw std::invalid_argument("exp_safe_threshold: trials must be >= 1");
  std::vector<double> grid = spec.grid.empty() ? default_threshold_grid() : spec.grid;
  std::sort(grid.begin(), grid.end());
  for (double g : grid) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw std::invalid_argument("exp_safe_threshold: grid values must be positive");
    }
  }

  SweepResult res;
  res.experiment = "safe_threshold";

  std::vector<QipProblem> problems;
  std::vector<std::vector<double>> unit_inits;
  problems.reserve(spec.trials);
  unit_inits.reserve(spec.trials);
  for (long t = 0; t < spec.trials; ++t) {
    problems.emplace_back(qip_generate(spec.d, spec.n, spec.density, spec.lambda1, spec.seed + t));
    Rng rng = Rng::derive(spec.seed + t, kStreamInit);
    unit_inits.push_back(ball_point(spec.d, 1.0, rng));
  }

  const std::size_t n_methods = spec.methods.size();
  const std::size_t n_trials = static_cast<std::size_t>(spec.trials);
  const std::size_t tasks = n_methods * n_trials;
  std::vector<std::vector<TrialRow>> task_rows(tasks);
  std::vector<ThresholdEntry> entries(tasks);

  detail::parallel_for(spec.jobs, tasks, [&](std::size_t id) {
    const std::size_t m = id / n_trials;
    const long t = static_cast<long>(id % n_trials);
    const MethodConfig& mc = spec.methods[m];
    const std::uint64_t seed = spec.seed + t;

    std::vector<double> x0 = unit_inits[t];
    for (double& v : x0) v *= spec.radius;
    const BlockVector init = BlockVector::single("x", std::move(x0));

    auto probe = [&](std::size_t g) {
      StepSchedule schedule;
      schedule.alpha0 = grid[g];
      const OptimizerConfig cfg = detail::make_config(spec, mc, schedule, seed);
      const StoppingRule stop = detail::make_stop(spec, std::nullopt, /*with_target=*/false);
      const RunTrace trace = run(problems[t], init, cfg, stop);
      task_rows[id].push_back(detail::make_row(res.experiment, mc, grid[g], t, seed, trace));
      return trace.status != RunStatus::collapsed;
    };

    double threshold = 0.0;
    if (probe(0)) {
      std::size_t lo = 0;                 // stable
      std::size_t hi = grid.size() - 1;   // first collapsing index once found
      if (grid.size() == 1 || probe(hi)) {
        threshold = grid[hi];
      } else {
        while (hi - lo > 1) {
          const std::size_t mid = lo + (hi - lo) / 2;
          if (probe(mid)) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        threshold = grid[lo];
      }
    }
    entries[id] = ThresholdEntry{mc.label, t, threshold};
  });

  for (std::size_t id = 0; id < tasks; ++id) {
    for (TrialRow& row : task_rows[id]) res.rows.push_back(std::move(row));
  }
  res.threshold_entries = std::move(entries);
  for (std::size_t m = 0; m < n_methods; ++m) {
    std::vector<double> per_trial;
    for (std::size_t t = 0; t < n_trials; ++t) {
      per_trial.push_back(res.threshold_entries[m * n_trials + t].threshold);
    }
    res.safe_thresholds.emplace_back(spec.methods[m].label, median(std::move(per_trial)));
  }
  return res;
}

// Teacher-student regression with the smoothed-ReLU network: constant
// stepsize, traces kept for every run.
inline SweepResult exp_mlp_train(const ExperimentSpec& spec) {
  if (spec.methods.empty()) throw std::invalid_argument("exp_mlp_train: no methods");
  if (spec.trials < 1) throw std::invalid_argument("exp_mlp_train: trials must be >= 1");

  SweepResult res;
  res.experiment = "mlp_train";

  MlpModel model;
  model.dims = spec.mlp_dims;
  model.eps = spec.mlp_eps;
  model.validate();

  std::vector<MlpProblem> problems;
  std::vector<BlockVector> inits;
  problems.reserve(spec.trials);
  inits.reserve(spec.trials);
  for (long t = 0; t < spec.trials; ++t) {
    auto [data, teacher] = mlp_teacher_data(model, spec.mlp_count, spec.mlp_noise, spec.seed + t);
    (void)teacher;
    problems.emplace_back(model, std::move(data));
    Rng rng = Rng::derive(spec.seed + t, kStreamInit);
    inits.push_back(mlp_init(model, spec.mlp_init_scale, rng));
  }

  StepSchedule schedule;
  schedule.alpha0 = spec.alpha0;
  const std::size_t n_methods = spec.methods.size();
  const std::size_t n_trials = static_cast<std::size_t>(spec.trials);
  const std::size_t tasks = n_methods * n_trials;
  res.rows.resize(tasks);
  res.traces.resize(tasks);
  res.trace_labels.resize(tasks);

  detail::parallel_for(spec.jobs, tasks, [&](std::size_t id) {
    const std::size_t m = id / n_trials;
    const long t = static_cast<long>(id % n_trials);
    const MethodConfig& mc = spec.methods[m];
    const std::uint64_t seed = spec.seed + t;
    const OptimizerConfig cfg = detail::make_config(spec, mc, schedule, seed);
    const StoppingRule stop = detail::make_stop(spec, std::nullopt, /*with_target=*/true);
    RunTrace trace = run(problems[t], inits[t], cfg, stop);
    res.rows[id] = detail::make_row(res.experiment, mc, std::numeric_limits<double>::quiet_NaN(),
                                    t, seed, trace);
    res.trace_labels[id] =
        detail::trace_label(mc, t, std::numeric_limits<double>::quiet_NaN());
    res.traces[id] = std::move(trace);
  });

  for (std::size_t m = 0; m < n_methods; ++m) {
    res.summaries.push_back(detail::summarize_cell(spec.methods[m].label,
                                                   std::numeric_limits<double>::quiet_NaN(),
                                                   res.rows, m * n_trials, 1, n_trials));
  }
  return res;
}

inline std::string rows_csv(const SweepResult& res) {
  std::ostringstream os;
  os << "experiment,method,kernel_delta,kernel_r,grid_value,trial,seed,status,steps,wall_ms,"
        "final_epsilon,final_objective\n";
  for (const TrialRow& r : res.rows) {
    os << r.experiment << ',' << r.method << ',' << format_double(r.kernel_delta) << ','
       << format_double(r.kernel_r) << ',' << format_double(r.grid_value) << ',' << r.trial << ','
       << r.seed << ',' << to_string(r.status) << ',' << r.steps << ','
       << format_double(r.wall_ms) << ',' << format_double(r.final_epsilon) << ','
       << format_double(r.final_objective) << '\n';
  }
  return os.str();
}

// One row per trace record; the label column keys which run a row belongs to.
inline std::string traces_csv(const SweepResult& res) {
  std::ostringstream os;
  os << "label,k,wall_ms,objective,epsilon_k,grad_map_norm,x_norm,v_norm\n";
  for (std::size_t i = 0; i < res.traces.size(); ++i) {
    const std::string& label = i < res.trace_labels.size() ? res.trace_labels[i] : "";
    for (const TraceRecord& rec : res.traces[i].records) {
      double x_sq = 0.0;
      for (double b : rec.block_x_norms) x_sq += b * b;
      double v_sq = 0.0;
      for (double b : rec.block_v_norms) v_sq += b * b;
      os << label << ',' << rec.k << ',' << format_double(rec.wall_ms) << ','
         << format_double(rec.objective) << ',' << format_double(rec.epsilon_k) << ','
         << format_double(rec.grad_map_norm) << ',' << format_double(std::sqrt(x_sq)) << ','
         << format_double(std::sqrt(v_sq)) << '\n';
    }
  }
  return os.str();
}

inline nlohmann::ordered_json result_json(const SweepResult& res) {
  nlohmann::ordered_json out;
  out["experiment"] = res.experiment;
  out["rows"] = nlohmann::ordered_json::array();
  for (const TrialRow& r : res.rows) {
    out["rows"].push_back({{"experiment", r.experiment},
                           {"method", r.method},
                           {"kernel_delta", r.kernel_delta},
                           {"kernel_r", r.kernel_r},
                           {"grid_value", r.grid_value},
                           {"trial", r.trial},
                           {"seed", r.seed},
                           {"status", to_string(r.status)},
                           {"steps", r.steps},
                           {"wall_ms", r.wall_ms},
                           {"final_epsilon", r.final_epsilon},
                           {"final_objective", r.final_objective}});
  }
  out["summaries"] = nlohmann::ordered_json::array();
  for (const GridSummary& s : res.summaries) {
    out["summaries"].push_back({{"method", s.method},
                                {"grid_value", s.grid_value},
                                {"trials", s.trials},
                                {"converged", s.converged},
                                {"collapsed", s.collapsed},
                                {"median_final_epsilon", s.median_final_epsilon},
                                {"convergent", s.convergent}});
  }
  if (!res.threshold_entries.empty()) {
    out["thresholds"] = nlohmann::ordered_json::array();
    for (const ThresholdEntry& e : res.threshold_entries) {
      out["thresholds"].push_back(
          {{"method", e.method}, {"trial", e.trial}, {"threshold", e.threshold}});
    }
    out["safe_thresholds"] = nlohmann::ordered_json::array();
    for (const auto& [method, value] : res.safe_thresholds) {
      out["safe_thresholds"].push_back({{"method", method}, {"median_threshold", value}});
    }
  }
  return out;
}

}  // namespace sbpg
