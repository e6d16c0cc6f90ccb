// Acceptance gate: nine behavioral criteria, one PASS/FAIL line each.
// Exit code = number of failed criteria. All tolerances are pinned here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbpg/experiments.hpp"
#include "sbpg/kernel.hpp"
#include "sbpg/metrics.hpp"
#include "sbpg/mlp.hpp"
#include "sbpg/optimizer.hpp"
#include "sbpg/prox.hpp"
#include "sbpg/qip.hpp"
#include "sbpg/rng.hpp"
#include "test_support.hpp"

using namespace sbpg;

namespace {

// Benchmark instance family (desk-scale preset).
constexpr long kBenchD = 100;
constexpr long kBenchN = 500;
constexpr double kBenchDensity = 0.05;
constexpr double kBenchLambda1 = 1e-3;

// Pinned tolerances.
constexpr double kTargetEpsilon = 1e-2;       // convergence target
constexpr double kConvergeTimeBudgetS = 60.0; // criterion 1 wall clock
constexpr long kConvergeStepCap = 200000;     // criterion 1 step cap
constexpr long kSweepStepCap = 200000;        // criterion 2 step cap per run
constexpr long kThresholdStepCap = 4000;      // criterion 3 probe length
constexpr double kTolDescentSlack = 1e-10;    // criterion 4 per-step slack
constexpr double kTolIterateMatch = 1e-12;    // criterion 5 euclidean equivalence
constexpr double kTolMomentumMatch = 1e-10;   // criterion 5 momentum mapping
constexpr double kTolProxMatch = 1e-6;        // criterion 6 oracle distance
constexpr double kTolKkt = 1e-6;              // criterion 6 optimality residual
constexpr double kTolRootResidual = 1e-12;    // criterion 6 scale equation
constexpr double kTolFourPoint = 1e-9;        // criterion 7 identity, relative
constexpr double kTolRoundtrip = 1e-9;        // criterion 7 inverse map, relative
constexpr double kTolFdRel = 1e-5;            // criterion 8 finite differences
constexpr double kRunningMedianRatio = 0.5;   // criterion 9 decay factor

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

ExperimentSpec bench_spec() {
  ExperimentSpec spec;
  spec.d = kBenchD;
  spec.n = kBenchN;
  spec.density = kBenchDensity;
  spec.lambda1 = kBenchLambda1;
  spec.seed = 7;
  spec.time_limit_s = -1.0;  // deterministic: step budgets only
  spec.check_every = 50;
  spec.target_epsilon = kTargetEpsilon;
  spec.alpha0 = 1e-3;
  spec.floor = 1e-4;
  spec.radius = 1e-2;
  spec.batch_m = 1;
  return spec;
}

double l2(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

double inf_diff(const BlockVector& a, std::span<const double> b) {
  double worst = 0.0;
  const auto& av = a.blocks[0].values;
  for (std::size_t i = 0; i < av.size(); ++i) {
    worst = std::max(worst, std::fabs(av[i] - b[i]));
  }
  return worst;
}

double inf_diff(const BlockVector& a, const BlockVector& b) {
  double worst = 0.0;
  for (std::size_t blk = 0; blk < a.blocks.size(); ++blk) {
    const auto& av = a.blocks[blk].values;
    const auto& bv = b.blocks[blk].values;
    for (std::size_t i = 0; i < av.size(); ++i) {
      worst = std::max(worst, std::fabs(av[i] - bv[i]));
    }
  }
  return worst;
}

// ---------------------------------------------------------------- criterion 1
// Stochastic Bregman runs on the benchmark family reach the stationarity
// target within the step cap for a median of seeds, inside the time budget.
Outcome check_convergence() {
  ExperimentSpec spec = bench_spec();
  spec.trials = 10;
  spec.step_limit = kConvergeStepCap;
  spec.methods = parse_method_list("sbpg");

  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult res = exp_converge(spec);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  long converged = 0;
  for (const TrialRow& row : res.rows) {
    if (row.status == RunStatus::converged) ++converged;
  }
  const bool majority = 2 * converged > spec.trials;
  const bool in_time = elapsed < kConvergeTimeBudgetS;
  return {majority && in_time,
          fmt("%ld/%ld trials reached epsilon <= %g in %.1fs", converged, spec.trials,
              kTargetEpsilon, elapsed)};
}

// ---------------------------------------------------------------- criterion 2
// Robustness sweeps: the Bregman kernel's convergent stepsize set contains the
// Euclidean one with at least one strict separation, and its maximal
// convergent init radius is strictly larger.
Outcome check_robustness_sweeps() {
  ExperimentSpec spec = bench_spec();
  spec.trials = 5;
  spec.step_limit = kSweepStepCap;
  spec.methods = parse_method_list("spg,sbpg");

  const SweepResult steps = exp_sweep_stepsize(spec);
  std::map<std::pair<std::string, double>, bool> conv;
  for (const GridSummary& s : steps.summaries) {
    conv[{s.method, s.grid_value}] = s.convergent;
  }
  bool included = true;
  bool separated = false;
  long spg_points = 0, sbpg_points = 0;
  for (double g : default_stepsize_grid()) {
    const bool cs = conv[{"spg", g}];
    const bool cb = conv[{"sbpg", g}];
    spg_points += cs;
    sbpg_points += cb;
    if (cs && !cb) included = false;
    if (cb && !cs) separated = true;
  }

  const SweepResult radii = exp_sweep_radius(spec);
  double max_spg = -1.0, max_sbpg = -1.0;
  for (const GridSummary& s : radii.summaries) {
    if (!s.convergent) continue;
    if (s.method == "spg") max_spg = std::max(max_spg, s.grid_value);
    if (s.method == "sbpg") max_sbpg = std::max(max_sbpg, s.grid_value);
  }
  const bool radius_gap = max_sbpg > max_spg && max_sbpg > 0.0;

  return {included && separated && radius_gap,
          fmt("stepsizes spg=%ld sbpg=%ld included=%d separated=%d; radius spg=%g sbpg=%g",
              spg_points, sbpg_points, included ? 1 : 0, separated ? 1 : 0, max_spg,
              max_sbpg)};
}

// ---------------------------------------------------------------- criterion 3
// Safe stepsize thresholds order by kernel degree: euclidean < quartic <=
// sextic (medians over trials).
Outcome check_safe_thresholds() {
  ExperimentSpec spec = bench_spec();
  spec.trials = 10;
  spec.step_limit = kThresholdStepCap;
  spec.check_every = 2000;
  spec.methods = parse_method_list("spg,sbpg:1:4,sbpg:1:6");

  const SweepResult res = exp_safe_threshold(spec);
  double t_spg = -1.0, t_r4 = -1.0, t_r6 = -1.0;
  for (const auto& [method, value] : res.safe_thresholds) {
    if (method == "spg") t_spg = value;
    if (method == "sbpg:1:4") t_r4 = value;
    if (method == "sbpg:1:6") t_r6 = value;
  }
  const bool ordered = t_spg < t_r4 && t_r4 <= t_r6;
  return {ordered, fmt("median thresholds: euclidean=%g quartic=%g sextic=%g", t_spg,
                       t_r4, t_r6)};
}

// ---------------------------------------------------------------- criterion 4
// Full-batch Bregman steps at alpha = 0.9/L never increase the composite
// objective, across 20 small instances.
Outcome check_full_batch_descent() {
  long violations = 0;
  double worst = 0.0;
  for (long i = 0; i < 20; ++i) {
    const long d = 5 + (7 * i) % 26;   // 5..30
    const long n = 10 + (11 * i) % 41; // 10..50
    const QipInstance inst = qip_generate(d, n, 0.3, 1e-3, 100 + static_cast<std::uint64_t>(i));
    QipProblem prob(inst);

    OptimizerConfig cfg;
    cfg.method = Method::sbpg;
    cfg.kernels = {KernelSpec{.delta = 1.0, .degree = 4.0}};
    cfg.lambda1 = inst.lambda1;
    const double alpha = 0.9 / qip_smooth_constant(inst);

    Rng init_rng = Rng::derive(100 + static_cast<std::uint64_t>(i), kStreamInit);
    OptimizerState st{BlockVector::single("x", ball_point(d, 1.0, init_rng)),
                      BlockVector(), 0, Rng(0)};
    st.v = BlockVector::zeros_like(st.x);

    double phi = prob.objective(st.x);
    for (long k = 0; k < 200; ++k) {
      const BlockVector g = prob.full_gradient(st.x);
      apply_step(cfg, st, g, alpha);
      const double next = prob.objective(st.x);
      const double slack = kTolDescentSlack * (1.0 + std::fabs(phi));
      if (!(next <= phi + slack)) {
        ++violations;
        worst = std::max(worst, next - phi);
      }
      phi = next;
    }
  }
  return {violations == 0,
          fmt("%ld increases across 20 instances x 200 steps (worst %.3e)", violations,
              worst)};
}

// ---------------------------------------------------------------- criterion 5
// Degenerate-kernel equivalences: the Bregman step with an identity kernel
// tracks a separately written euclidean proximal SGD loop, and zero decay with
// a convention-mapped momentum rate tracks the plain momentum method.
Outcome check_reductions() {
  QipProblem prob(qip_generate(20, 50, 0.2, 1e-3, 61));
  Rng init_rng = Rng::derive(61, kStreamInit);
  const BlockVector x0 = BlockVector::single("x", ball_point(20, 1e-2, init_rng));

  OptimizerConfig cfg;
  cfg.method = Method::sbpg;
  cfg.kernels = {KernelSpec{.delta = 0.0, .degree = 2.0}};
  cfg.lambda1 = 1e-3;
  cfg.schedule.kind = StepSchedule::Kind::inverse_sqrt_floor;
  cfg.schedule.alpha0 = 1e-3;
  cfg.schedule.floor = 1e-4;

  OptimizerState st{x0, BlockVector::zeros_like(x0), 0, Rng::derive(5, kStreamRun)};
  std::vector<double> ref = x0.blocks[0].values;
  Rng ref_rng = Rng::derive(5, kStreamRun);
  double worst_euclid = 0.0;
  for (long k = 0; k < 1000; ++k) {
    const double alpha = cfg.schedule.at(k);
    const BlockVector g = prob.minibatch_gradient(st.x, 1, st.rng);
    const BlockVector gr =
        prob.minibatch_gradient(BlockVector::single("x", ref), 1, ref_rng);
    const double tau = alpha * cfg.lambda1;
    for (std::size_t j = 0; j < ref.size(); ++j) {
      const double y = ref[j] - alpha * gr.blocks[0].values[j];
      const double m = std::fabs(y) - tau;
      ref[j] = m > 0.0 ? (y > 0.0 ? m : -m) : 0.0;
    }
    apply_step(cfg, st, g, alpha);
    worst_euclid = std::max(worst_euclid, inf_diff(st.x, ref));
  }

  OptimizerConfig ma;
  ma.method = Method::msbpg;
  ma.kernels = {KernelSpec{.delta = 1.0, .degree = 4.0}};
  ma.lambda1 = 0.0;
  ma.schedule.kind = StepSchedule::Kind::inverse_sqrt_floor;
  ma.schedule.alpha0 = 1e-3;
  ma.schedule.floor = 1e-4;
  ma.momentum.convention = MomentumSpec::Convention::smae;
  ma.momentum.beta = 0.25;

  OptimizerConfig mb = ma;
  mb.method = Method::msbpg_wd;
  mb.lambda2 = 0.0;
  mb.momentum.convention = MomentumSpec::Convention::bias_corrected;
  mb.momentum.beta = 0.75;  // keep = 0.75, take = 0.25 on both sides
  mb.momentum.bias_correction = false;

  OptimizerState sa{x0, BlockVector::zeros_like(x0), 0, Rng::derive(6, kStreamRun)};
  OptimizerState sb{x0, BlockVector::zeros_like(x0), 0, Rng::derive(6, kStreamRun)};
  double worst_momentum = 0.0;
  for (long k = 0; k < 1000; ++k) {
    const double alpha = ma.schedule.at(k);
    const BlockVector ga = prob.minibatch_gradient(sa.x, 1, sa.rng);
    const BlockVector gb = prob.minibatch_gradient(sb.x, 1, sb.rng);
    apply_step(ma, sa, ga, alpha);
    apply_step(mb, sb, gb, alpha);
    worst_momentum = std::max(worst_momentum, inf_diff(sa.x, sb.x));
  }

  const bool pass = worst_euclid <= kTolIterateMatch && worst_momentum <= kTolMomentumMatch;
  return {pass, fmt("euclidean gap %.2e (tol %g), momentum gap %.2e (tol %g)", worst_euclid,
                    kTolIterateMatch, worst_momentum, kTolMomentumMatch)};
}

// ---------------------------------------------------------------- criterion 6
// The closed-form prox agrees with an independent golden-section search along
// the thresholded direction, satisfies the subproblem optimality conditions,
// and leaves a tiny scale-equation residual. 1000 randomized cases.
Outcome check_prox_oracle() {
  Rng rng(606);
  const double deltas[] = {0.0, 1e-3, 1.0};
  const double degrees[] = {2.0, 4.0, 6.0};
  const double lambdas[] = {0.0, 1e-3, 1.0};
  long cases = 0, failures = 0;
  double worst_gap = 0.0, worst_kkt = 0.0, worst_res = 0.0;

  for (int rep = 0; rep < 1000; ++rep) {
    const double delta = deltas[rng.index(3)];
    const double degree = degrees[rng.index(3)];
    const double lambda1 = lambdas[rng.index(3)];
    const double alpha = std::exp(std::log(1e-3) + rng.uniform() * std::log(1e4));
    const std::size_t d = 2 + rng.index(6);
    std::vector<double> p(d);
    const double scale = std::exp(rng.normal());
    for (double& v : p) v = scale * rng.normal();

    const KernelSpec k{.delta = delta, .degree = degree};
    const std::vector<double> w = bregman_prox_l1(p, alpha, lambda1, k);
    const double tau = alpha * lambda1;
    ++cases;

    bool ok = true;
    const double kkt = oracle::prox_kkt_violation(delta, degree, p, tau, w);
    worst_kkt = std::max(worst_kkt, kkt);
    if (kkt > kTolKkt) ok = false;

    const std::vector<double> plus = soft_threshold(std::span<const double>(p), tau);
    const double plus_norm = l2(plus);
    if (plus_norm == 0.0) {
      for (double v : w) {
        if (v != 0.0) ok = false;
      }
    } else {
      const auto along = [&](double t) {
        std::vector<double> cand(plus.size());
        for (std::size_t i = 0; i < plus.size(); ++i) cand[i] = -t * plus[i];
        return oracle::prox_objective(delta, degree, p, tau, cand);
      };
      const double t_star = oracle::golden_min(along, 0.0, 1.0 + 1e-9);
      double gap = 0.0;
      for (std::size_t i = 0; i < plus.size(); ++i) {
        gap = std::max(gap, std::fabs(w[i] - (-t_star * plus[i])));
      }
      worst_gap = std::max(worst_gap, gap / (1.0 + plus_norm));
      if (gap > kTolProxMatch * (1.0 + plus_norm)) ok = false;

      const double t_impl = l2(w) / plus_norm;
      const double c = k.euclidean() ? 0.0 : delta * std::pow(plus_norm, degree - 2.0);
      const double residual = std::fabs(c * std::pow(t_impl, degree - 1.0) + t_impl - 1.0);
      worst_res = std::max(worst_res, residual);
      if (residual > kTolRootResidual * (1.0 + c)) ok = false;
    }
    if (!ok) ++failures;
  }
  return {failures == 0,
          fmt("%ld/%ld cases ok (worst: search gap %.1e, kkt %.1e, residual %.1e)",
              cases - failures, cases, worst_gap, worst_kkt, worst_res)};
}

// ---------------------------------------------------------------- criterion 7
// Five property suites, >= 1000 randomized cases each.
Outcome check_property_suites() {
  std::vector<std::string> failed;

  // (a) four-point identity of the Bregman distance
  {
    Rng rng(707);
    const double degrees[] = {2.0, 4.0, 6.0};
    bool ok = true;
    for (int rep = 0; rep < 1000 && ok; ++rep) {
      const double delta =
          (rep % 4 == 0) ? 0.0 : std::exp(std::log(1e-3) + rng.uniform() * std::log(1e4));
      const KernelSpec k{.delta = delta, .degree = degrees[rng.index(3)]};
      std::vector<double> a = ball_point(5, 3.0, rng), b = ball_point(5, 3.0, rng);
      std::vector<double> c = ball_point(5, 3.0, rng), d = ball_point(5, 3.0, rng);
      const std::vector<double> ga = phi_gradient(k, a), gb = phi_gradient(k, b);
      double lhs = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) lhs += (ga[i] - gb[i]) * (c[i] - d[i]);
      const double d_cb = bregman_distance(k, c, b), d_da = bregman_distance(k, d, a);
      const double d_ca = bregman_distance(k, c, a), d_db = bregman_distance(k, d, b);
      const double rhs = d_cb + d_da - d_ca - d_db;
      const double scale = 1.0 + std::fabs(d_cb) + std::fabs(d_da) + std::fabs(d_ca) +
                           std::fabs(d_db) + std::fabs(lhs);
      if (std::fabs(lhs - rhs) > kTolFourPoint * scale) ok = false;
    }
    if (!ok) failed.push_back("four-point identity");
  }

  // (b) prox nonexpansiveness in the proximal point
  {
    Rng rng(708);
    const double degrees[] = {2.0, 4.0, 6.0};
    bool ok = true;
    for (int rep = 0; rep < 1000 && ok; ++rep) {
      const double delta =
          (rep % 4 == 0) ? 0.0 : std::exp(std::log(1e-2) + rng.uniform() * std::log(1e3));
      const KernelSpec k{.delta = delta, .degree = degrees[rng.index(3)]};
      const double lambda1 = 0.5 * rng.uniform();
      std::vector<double> y1 = ball_point(5, 4.0, rng), y2 = ball_point(5, 4.0, rng);
      std::vector<double> p1(5), p2(5);
      for (int i = 0; i < 5; ++i) {
        p1[i] = -y1[i];
        p2[i] = -y2[i];
      }
      const std::vector<double> x1 = bregman_prox_l1(p1, 1.0, lambda1, k);
      const std::vector<double> x2 = bregman_prox_l1(p2, 1.0, lambda1, k);
      double dx = 0.0, dy = 0.0;
      for (int i = 0; i < 5; ++i) {
        dx += (x1[i] - x2[i]) * (x1[i] - x2[i]);
        dy += (y1[i] - y2[i]) * (y1[i] - y2[i]);
      }
      if (std::sqrt(dx) > std::sqrt(dy) * (1.0 + 1e-12) + 1e-15) ok = false;
    }
    if (!ok) failed.push_back("prox nonexpansiveness");
  }

  // (c) kernel gradient / inverse roundtrip, both directions
  {
    Rng rng(709);
    const double degrees[] = {2.0, 4.0, 6.0};
    bool ok = true;
    for (int rep = 0; rep < 1000 && ok; ++rep) {
      const double delta =
          (rep % 4 == 0) ? 0.0 : std::exp(std::log(1e-3) + rng.uniform() * std::log(1e4));
      const KernelSpec k{.delta = delta, .degree = degrees[rng.index(3)]};
      const std::vector<double> x = ball_point(6, 5.0, rng);
      const std::vector<double> y = phi_gradient(k, x);
      const std::vector<double> back = invert_gradient(k, y);
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::fabs(back[i] - x[i]) > kTolRoundtrip * (1.0 + l2(x))) ok = false;
      }
      const std::vector<double> fwd = phi_gradient(k, invert_gradient(k, x));
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::fabs(fwd[i] - x[i]) > kTolRoundtrip * (1.0 + l2(x))) ok = false;
      }
    }
    if (!ok) failed.push_back("gradient inverse roundtrip");
  }

  // (d) mapping gap bounded by the estimator gap
  {
    Rng rng(710);
    QipProblem prob(qip_generate(12, 30, 0.25, 1e-3, 71));
    const std::vector<KernelSpec> kernels = {KernelSpec{.delta = 1.0, .degree = 4.0}};
    bool ok = true;
    for (int rep = 0; rep < 1000 && ok; ++rep) {
      const BlockVector x = BlockVector::single("x", ball_point(12, 2.0, rng));
      const double alpha = std::exp(std::log(1e-3) + rng.uniform() * std::log(1e4));
      const BlockVector full = prob.full_gradient(x);
      const BlockVector est = prob.minibatch_gradient(x, 1 + static_cast<long>(rng.index(5)), rng);
      BlockVector diff = bregman_gradient_mapping(x, full, alpha, 1e-3, kernels);
      diff.axpy(-1.0, bregman_gradient_mapping(x, est, alpha, 1e-3, kernels));
      BlockVector gap = full;
      gap.axpy(-1.0, est);
      if (diff.norm() > gap.norm() * (1.0 + 1e-12) + 1e-15) ok = false;
    }
    if (!ok) failed.push_back("estimator gap bound");
  }

  // (e) smoothed relu bounds and convergence to relu
  {
    Rng rng(711);
    bool ok = true;
    for (int rep = 0; rep < 1000 && ok; ++rep) {
      const double Eps = std::exp(std::log(1e-6) + rng.uniform() * std::log(1e6));
      const double x = 4.0 * rng.normal();
      const double relu = std::max(x, 0.0);
      const double s = smoothed_relu(x, Eps);
      if (s > relu + 1e-15) ok = false;
      if (s < relu - 0.5 * Eps - 1e-15) ok = false;  // implies pointwise convergence
      const double g = smoothed_relu_grad(x, Eps);
      if (g < 0.0 || g > 1.0 + 1e-15) ok = false;
    }
    if (!ok) failed.push_back("smoothed relu bounds");
  }

  std::string detail = "all five suites passed (1000 cases each)";
  if (!failed.empty()) {
    detail = "failed:";
    for (const std::string& f : failed) detail += " [" + f + "]";
  }
  return {failed.empty(), detail};
}

// ---------------------------------------------------------------- criterion 8
// Analytic gradients match central finite differences at h = 1e-5 to relative
// 1e-5, >= 100 randomized cases per problem family.
Outcome check_gradients_fd() {
  long qip_cases = 0, qip_bad = 0;
  {
    Rng rng(808);
    for (int inst_i = 0; inst_i < 4; ++inst_i) {
      const QipInstance inst = qip_generate(6 + 2 * inst_i, 12 + 3 * inst_i, 0.4, 0.0,
                                            800 + static_cast<std::uint64_t>(inst_i));
      for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> x(inst.d), u(inst.d);
        rng.fill_normal(x);
        rng.fill_normal(u);
        const double un = l2(u);
        for (double& c : u) c /= un;
        const auto along = [&](double t) {
          std::vector<double> y = x;
          for (long j = 0; j < inst.d; ++j) y[j] += t * u[j];
          return qip_smooth_objective(inst, y);
        };
        const double fd = oracle::central_diff(along, 0.0, 1e-5);
        const std::vector<double> g = qip_full_gradient(inst, x);
        double du = 0.0;
        for (long j = 0; j < inst.d; ++j) du += g[j] * u[j];
        ++qip_cases;
        if (std::fabs(du - fd) > kTolFdRel * std::fabs(fd) + 1e-7) ++qip_bad;
      }
    }
  }

  long mlp_cases = 0, mlp_bad = 0;
  {
    MlpModel model{.dims = {4, 8, 2}, .eps = 0.1, .lambda2 = 0.0};
    auto [data, teacher] = mlp_teacher_data(model, 12, 0.05, 81);
    std::vector<long> all(data.count);
    for (long i = 0; i < data.count; ++i) all[i] = i;
    Rng rng(809);
    for (int draw = 0; draw < 3; ++draw) {
      const BlockVector w = mlp_init(model, 1.0, rng);
      const MlpEval eval = mlp_loss_and_gradient(model, w, data, all);
      for (std::size_t l = 0; l < w.blocks.size(); ++l) {
        for (std::size_t j = 0; j < w.blocks[l].values.size(); ++j) {
          const double h = 1e-5 * (1.0 + std::fabs(w.blocks[l].values[j]));
          const double fd = oracle::central_diff(
              [&](double t) {
                BlockVector wp = w;
                wp.blocks[l].values[j] = t;
                return mlp_loss_and_gradient(model, wp, data, all).loss;
              },
              w.blocks[l].values[j], h);
          ++mlp_cases;
          if (std::fabs(eval.gradient.blocks[l].values[j] - fd) >
              kTolFdRel * std::fabs(fd) + 1e-7) {
            ++mlp_bad;
          }
        }
      }
    }
  }

  return {qip_bad == 0 && mlp_bad == 0 && qip_cases >= 100 && mlp_cases >= 100,
          fmt("inverse-problem %ld/%ld ok, network %ld/%ld ok", qip_cases - qip_bad,
              qip_cases, mlp_cases - mlp_bad, mlp_cases)};
}

// ---------------------------------------------------------------- criterion 9
// With the coupled momentum schedule and a decaying stepsize, the running
// median of the recorded mapping norms keeps shrinking: its value at step 1e4
// is below half its value at step 1e3 (median over 5 seeds).
Outcome check_running_median_decay() {
  auto running_median = [](const std::vector<TraceRecord>& recs, std::size_t idx) {
    const std::size_t lo = idx >= 10 ? idx - 10 : 0;
    std::vector<double> window;
    for (std::size_t i = lo; i <= idx; ++i) window.push_back(recs[i].grad_map_norm);
    return median(std::move(window));
  };

  std::vector<double> ratios;
  for (int s = 0; s < 5; ++s) {
    const std::uint64_t seed = 900 + static_cast<std::uint64_t>(s);
    QipProblem prob(qip_generate(kBenchD, kBenchN, kBenchDensity, kBenchLambda1, seed));
    Rng init_rng = Rng::derive(seed, kStreamInit);
    const BlockVector x0 = BlockVector::single("x", ball_point(kBenchD, 1e-2, init_rng));

    OptimizerConfig cfg;
    cfg.method = Method::msbpg;
    cfg.kernels = {KernelSpec{.delta = 1.0, .degree = 4.0}};
    cfg.lambda1 = kBenchLambda1;
    cfg.schedule.kind = StepSchedule::Kind::inverse_sqrt_floor;
    cfg.schedule.alpha0 = 3e-2;
    cfg.schedule.floor = 0.0;
    cfg.momentum.convention = MomentumSpec::Convention::smae;
    cfg.momentum.beta_schedule = MomentumSpec::BetaSchedule::coupled;
    cfg.momentum.couple_c = 3e-2;
    cfg.seed = seed;

    StoppingRule stop;
    stop.max_steps = 10000;
    stop.check_every = 50;

    const RunTrace trace = run(prob, x0, cfg, stop);
    if (trace.status == RunStatus::collapsed) return {false, "a seed collapsed"};

    std::size_t i1000 = 0, i10000 = 0;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      if (trace.records[i].k == 1000) i1000 = i;
      if (trace.records[i].k == 10000) i10000 = i;
    }
    if (i1000 == 0 || i10000 == 0) return {false, "expected records missing"};
    const double early = running_median(trace.records, i1000);
    const double late = running_median(trace.records, i10000);
    if (!std::isfinite(early) || !std::isfinite(late) || early <= 0.0) {
      return {false, "non-finite mapping norms"};
    }
    ratios.push_back(late / early);
  }
  const double med = median(ratios);
  return {med < kRunningMedianRatio,
          fmt("median late/early mapping-norm ratio %.3f (need < %.2f)", med,
              kRunningMedianRatio)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"criterion 1: benchmark convergence within budget", check_convergence},
      {"criterion 2: wider stepsize and radius robustness", check_robustness_sweeps},
      {"criterion 3: safe thresholds ordered by kernel degree", check_safe_thresholds},
      {"criterion 4: monotone full-batch descent", check_full_batch_descent},
      {"criterion 5: degenerate-kernel equivalences", check_reductions},
      {"criterion 6: prox matches independent oracles", check_prox_oracle},
      {"criterion 7: randomized property suites", check_property_suites},
      {"criterion 8: gradients match finite differences", check_gradients_fd},
      {"criterion 9: running-median stationarity decay", check_running_median_decay},
  };

  int fails = 0;
  for (const auto& [name, fn] : checks) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++fails;
    std::printf("[%s] %s - %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", checks.size() - static_cast<std::size_t>(fails),
              checks.size());
  return fails;
}
