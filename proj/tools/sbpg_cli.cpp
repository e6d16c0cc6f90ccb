// Command line harness around the experiment drivers.
//
// Configuration precedence: JSON config file (--config), then the --fast
// preset, then explicit flags. Results are written to --out (or stdout) as a
// single JSON document or as the trial-row CSV; per-step traces go to a
// separate CSV file when --traces is given.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbpg/experiments.hpp"
#include "sbpg/qip.hpp"

using namespace sbpg;

namespace {

MomentumSpec::Convention parse_convention(const std::string& s) {
  if (s == "smae") return MomentumSpec::Convention::smae;
  if (s == "bias_corrected") return MomentumSpec::Convention::bias_corrected;
  throw std::invalid_argument("momentum convention must be smae or bias_corrected: " + s);
}

void apply_momentum_config(MomentumSpec& m, const nlohmann::json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "convention") {
      m.convention = parse_convention(value.get<std::string>());
    } else if (key == "beta") {
      m.beta = value.get<double>();
    } else if (key == "couple_c") {
      m.couple_c = value.get<double>();
      m.beta_schedule = MomentumSpec::BetaSchedule::coupled;
    } else if (key == "bias_correction") {
      m.bias_correction = value.get<bool>();
    } else {
      throw std::invalid_argument("config: unknown momentum key: " + key);
    }
  }
}

void apply_config(ExperimentSpec& spec, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "d") spec.d = value.get<long>();
    else if (key == "n") spec.n = value.get<long>();
    else if (key == "density") spec.density = value.get<double>();
    else if (key == "lambda1") spec.lambda1 = value.get<double>();
    else if (key == "lambda2") spec.lambda2 = value.get<double>();
    else if (key == "seed") spec.seed = value.get<std::uint64_t>();
    else if (key == "trials") spec.trials = value.get<long>();
    else if (key == "step_limit") spec.step_limit = value.get<long>();
    else if (key == "time_limit_s") spec.time_limit_s = value.get<double>();
    else if (key == "check_every") spec.check_every = value.get<long>();
    else if (key == "target_epsilon") spec.target_epsilon = value.get<double>();
    else if (key == "alpha0") spec.alpha0 = value.get<double>();
    else if (key == "floor") spec.floor = value.get<double>();
    else if (key == "radius") spec.radius = value.get<double>();
    else if (key == "batch_m") spec.batch_m = value.get<long>();
    else if (key == "jobs") spec.jobs = value.get<int>();
    else if (key == "wall_times") spec.wall_times = value.get<bool>();
    else if (key == "methods") spec.methods = parse_method_list(value.get<std::string>());
    else if (key == "grid") spec.grid = value.get<std::vector<double>>();
    else if (key == "momentum") apply_momentum_config(spec.momentum, value);
    else if (key == "mlp_dims") spec.mlp_dims = value.get<std::vector<long>>();
    else if (key == "mlp_count") spec.mlp_count = value.get<long>();
    else if (key == "mlp_noise") spec.mlp_noise = value.get<double>();
    else if (key == "mlp_eps") spec.mlp_eps = value.get<double>();
    else if (key == "mlp_init_scale") spec.mlp_init_scale = value.get<double>();
    else throw std::invalid_argument("config: unknown key: " + key);
  }
}

void write_file(const std::string& path, const std::string& payload) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << payload;
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic Bregman proximal gradient experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::string traces_path;
  std::string methods_csv;
  std::string convention;
  bool fast = false;
  bool no_bias_correction = false;
  double beta_couple_c = 0.0;

  ExperimentSpec spec;
  // The config file is applied before flag overrides, so locate it first.
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" || arg == "-c") {
      if (i + 1 < argc) config_path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      config_path = arg.substr(9);
    }
  }
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) {
      std::cerr << "error: cannot read config: " << config_path << "\n";
      return 1;
    }
    try {
      nlohmann::json j;
      is >> j;
      apply_config(spec, j);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  app.add_option("--config,-c", config_path, "JSON config file applied before flags");
  app.add_option("--out,-o", out_path, "output path (default: stdout)");
  app.add_option("--format,-f", format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--traces", traces_path, "also write per-record traces to this CSV file");
  auto* opt_d = app.add_option("--d", spec.d, "problem dimension");
  auto* opt_n = app.add_option("--n", spec.n, "sample count");
  app.add_option("--density", spec.density, "nonzero fraction of each measurement row");
  app.add_option("--lambda1", spec.lambda1, "l1 weight");
  app.add_option("--lambda2", spec.lambda2, "decoupled decay weight (msbpg_wd)");
  app.add_option("--seed", spec.seed, "base seed; trial t uses seed+t");
  app.add_option("--trials", spec.trials, "trials per cell");
  app.add_option("--step-limit", spec.step_limit, "step budget per run");
  app.add_option("--time-limit-s", spec.time_limit_s, "wall clock cap per run; <0 disables");
  app.add_option("--check-every", spec.check_every, "record/target cadence in steps");
  app.add_option("--target-epsilon", spec.target_epsilon, "stationarity target; <=0 disables");
  app.add_option("--alpha0", spec.alpha0, "initial stepsize");
  app.add_option("--floor", spec.floor, "inverse-sqrt schedule floor");
  app.add_option("--radius", spec.radius, "init ball radius");
  app.add_option("--batch-m", spec.batch_m, "minibatch size");
  app.add_option("--jobs", spec.jobs, "worker threads across trials");
  app.add_flag("--wall-times", spec.wall_times, "record wall clock times");
  app.add_option("--methods", methods_csv,
                 "comma list: spg | sbpg[:delta[:r]] | msbpg[:delta[:r]] | "
                 "msbpg_wd[:delta[:r]] | spg_momentum");
  app.add_option("--grid", spec.grid, "sweep grid values")->delimiter(',');
  app.add_flag("--fast", fast, "desk-scale preset: d=100, n=500");
  app.add_option("--beta", spec.momentum.beta, "momentum rate");
  app.add_option("--momentum-convention", convention, "smae | bias_corrected");
  app.add_option("--beta-couple-c", beta_couple_c,
                 "couple beta to the stepsize: beta_k = min(1, alpha_k/c)");
  app.add_flag("--no-bias-correction", no_bias_correction, "disable bias correction");
  app.add_option("--mlp-dims", spec.mlp_dims, "network layer sizes")->delimiter(',');
  app.add_option("--mlp-count", spec.mlp_count, "training samples");
  app.add_option("--mlp-noise", spec.mlp_noise, "teacher target noise");
  app.add_option("--mlp-eps", spec.mlp_eps, "activation smoothing width");
  app.add_option("--mlp-init-scale", spec.mlp_init_scale, "init scale multiplier");

  CLI::App* cmd_converge =
      app.add_subcommand("converge", "decaying-stepsize convergence runs");
  CLI::App* cmd_steps =
      app.add_subcommand("sweep-stepsize", "robustness sweep over initial stepsizes");
  CLI::App* cmd_radius =
      app.add_subcommand("sweep-radius", "robustness sweep over init radii");
  CLI::App* cmd_threshold =
      app.add_subcommand("safe-threshold", "largest stepsize that avoids collapse");
  CLI::App* cmd_mlp = app.add_subcommand("mlp-train", "smoothed-relu network training");
  CLI::App* cmd_instance =
      app.add_subcommand("instance", "generate a problem instance file (--out required)");
  for (CLI::App* sub : {cmd_converge, cmd_steps, cmd_radius, cmd_threshold, cmd_mlp,
                        cmd_instance}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (fast) {
      if (opt_d->count() == 0) spec.d = 100;
      if (opt_n->count() == 0) spec.n = 500;
    }
    if (!methods_csv.empty()) spec.methods = parse_method_list(methods_csv);
    if (!convention.empty()) spec.momentum.convention = parse_convention(convention);
    if (beta_couple_c > 0.0) {
      spec.momentum.beta_schedule = MomentumSpec::BetaSchedule::coupled;
      spec.momentum.couple_c = beta_couple_c;
    }
    if (no_bias_correction) spec.momentum.bias_correction = false;
    if (!traces_path.empty()) spec.keep_traces = true;

    if (cmd_instance->parsed()) {
      if (out_path.empty()) throw std::invalid_argument("instance: --out is required");
      qip_save(qip_generate(spec.d, spec.n, spec.density, spec.lambda1, spec.seed), out_path);
      return 0;
    }

    if (spec.methods.empty()) {
      if (cmd_mlp->parsed()) {
        spec.methods = parse_method_list("msbpg_wd");
      } else if (cmd_threshold->parsed()) {
        spec.methods = parse_method_list("spg,sbpg:1:4,sbpg:1:6");
      } else {
        spec.methods = parse_method_list("spg,sbpg");
      }
    }

    SweepResult res;
    if (cmd_converge->parsed()) res = exp_converge(spec);
    else if (cmd_steps->parsed()) res = exp_sweep_stepsize(spec);
    else if (cmd_radius->parsed()) res = exp_sweep_radius(spec);
    else if (cmd_threshold->parsed()) res = exp_safe_threshold(spec);
    else res = exp_mlp_train(spec);

    const std::string payload =
        format == "csv" ? rows_csv(res) : result_json(res).dump(2) + "\n";
    if (out_path.empty()) {
      std::cout << payload;
    } else {
      write_file(out_path, payload);
    }
    if (!traces_path.empty()) write_file(traces_path, traces_csv(res));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
