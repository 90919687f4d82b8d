#include "clipadam/experiment.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace clipadam;

int do_run(const std::string& config_path, const std::string& out_dir,
           const std::optional<std::uint64_t>& seed,
           const std::optional<int>& jobs, bool force_verify) {
  ExperimentSpec spec = parse_spec_file(config_path);
  if (!out_dir.empty()) spec.out_dir = out_dir;
  if (seed) spec.seed = *seed;
  if (jobs) spec.jobs = *jobs;
  if (force_verify) {
    for (RunSpec& r : spec.runs) r.verify = true;
  }
  ExperimentResult result = execute(spec);
  for (const RunOutcome& o : result.outcomes) {
    std::cout << o.name << ": " << o.status;
    if (!o.detail.empty()) std::cout << " — " << o.detail;
    std::cout << '\n';
  }
  std::cout << "summary: " << result.summary_path << '\n';
  if (result.any_error) return 2;
  if (result.any_io_error) return 3;
  if (result.any_check_failed) return 1;
  return 0;
}

int do_bounds(double L, double b, double c, double eps,
              const std::optional<double>& alpha_opt,
              const std::optional<double>& delta) {
  HyperParams hp;
  hp.b = b;
  hp.c = c;
  hp.eps = eps;
  hp.clip_floor = delta;
  if (alpha_opt) hp.alpha_override = alpha_opt;
  double alpha = resolved_alpha(PolicyKind::rmsprop_adam, hp);
  SafeBounds det = validate(hp, L, alpha, BoundMode::deterministic);
  SafeBounds sto = validate(hp, L, alpha, BoundMode::stochastic);

  std::cout << "alpha      = " << format_double(alpha) << '\n';
  std::cout << "a_sup      = " << format_double(det.a_sup) << '\n';
  std::cout << "bar_a_sup  = " << format_double(det.bar_a_sup) << '\n';
  if (std::isfinite(det.a_sup) && det.a_sup > 0.0) {
    std::cout << "floor(det) = "
              << format_double(delta.value_or(default_clip_floor(det.a_sup)))
              << '\n';
  }
  if (std::isfinite(det.bar_a_sup) && det.bar_a_sup > 0.0) {
    std::cout << "floor(sto) = "
              << format_double(delta.value_or(default_clip_floor(det.bar_a_sup)))
              << '\n';
  }
  std::cout << "deterministic: " << (det.valid ? "ok" : det.diagnostics) << '\n';
  std::cout << "stochastic:    " << (sto.valid ? "ok" : sto.diagnostics) << '\n';
  return (det.valid && sto.valid) ? 0 : 2;
}

int do_figure1(const std::string& out_dir, std::int64_t max_iter,
               const std::vector<double>& p_values,
               const std::vector<std::string>& algorithms) {
  Figure1Options opts;
  if (max_iter > 0) opts.max_iter = max_iter;
  if (!p_values.empty()) opts.p_values = p_values;
  if (!algorithms.empty()) opts.algorithms = algorithms;
  std::vector<Figure1Cell> cells = figure1_experiment(opts);
  std::string summary = write_figure1_outputs(cells, out_dir);
  for (const Figure1Cell& cell : cells) {
    std::cout << cell.algorithm << " p=" << format_double(cell.p) << ": "
              << regime_name(cell.classification.regime);
    if (cell.classification.fitted_slope) {
      std::cout << " slope=" << format_double(*cell.classification.fitted_slope);
    }
    if (cell.classification.fitted_q) {
      std::cout << " q=" << format_double(*cell.classification.fitted_q);
    }
    if (cell.diverged) std::cout << " (diverged)";
    std::cout << '\n';
  }
  std::cout << "summary: " << summary << '\n';
  return 0;
}

int do_verify(const std::string& csv_path, const std::string& report_path) {
  std::string log;
  bool ok = verify_artifacts(csv_path, report_path, log);
  std::cout << log;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "clipadam — clipped adaptive-momentum optimizer with verifiable "
      "convergence diagnostics"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Execute a JSON experiment config");
  std::string config_path;
  run_cmd->add_option("config", config_path, "path to the experiment JSON")
      ->required();
  std::string out_dir;
  run_cmd->add_option("--out-dir", out_dir, "override the config's out_dir");
  std::optional<std::uint64_t> seed;
  run_cmd->add_option("--seed", seed, "override the config's base seed");
  std::optional<int> jobs;
  run_cmd->add_option("--jobs", jobs, "worker threads (0 = all cores)");
  bool force_verify = false;
  run_cmd->add_flag("--verify", force_verify, "attach checks to every run");

  auto* bounds_cmd =
      app.add_subcommand("bounds", "Print safe step-size caps for (L, b, c, eps)");
  double L = 0, b = 0.1, c = 0.001, eps = 0.1;
  bounds_cmd->add_option("--L", L, "gradient Lipschitz constant")->required();
  bounds_cmd->add_option("--b", b, "momentum mixing rate");
  bounds_cmd->add_option("--c", c, "second-moment mixing rate");
  bounds_cmd->add_option("--eps", eps, "decrease margin");
  std::optional<double> alpha_opt;
  bounds_cmd->add_option("--alpha", alpha_opt,
                         "step-growth factor (default sqrt(1-c))");
  std::optional<double> delta;
  bounds_cmd->add_option("--delta", delta, "clip floor to check against the caps");

  auto* fig_cmd = app.add_subcommand(
      "figure1", "Rate-classification grid on the monomial family");
  std::string fig_out = "figure1";
  fig_cmd->add_option("--out-dir", fig_out, "output directory");
  std::int64_t fig_iters = 0;
  fig_cmd->add_option("--max-iter", fig_iters, "iterations per cell");
  std::vector<double> fig_p;
  fig_cmd->add_option("--p", fig_p, "monomial exponents (default grid)");
  std::vector<std::string> fig_algos;
  fig_cmd->add_option("--algorithms", fig_algos,
                      "subset of clipped_adam, adam_unclipped, gd");

  auto* verify_cmd =
      app.add_subcommand("verify", "Re-check a stored trace against its report");
  std::string v_csv, v_report;
  verify_cmd->add_option("trace", v_csv, "trace CSV path")->required();
  verify_cmd->add_option("report", v_report, "run report JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return do_run(config_path, out_dir, seed, jobs, force_verify);
    }
    if (bounds_cmd->parsed()) {
      return do_bounds(L, b, c, eps, alpha_opt, delta);
    }
    if (fig_cmd->parsed()) {
      return do_figure1(fig_out, fig_iters, fig_p, fig_algos);
    }
    if (verify_cmd->parsed()) {
      return do_verify(v_csv, v_report);
    }
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
