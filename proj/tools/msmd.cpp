// msmd: run mirror-descent experiments from a config file.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "msmd/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;
constexpr int kCheckFailed = 4;

struct Globals {
  std::string config;
  std::string out = ".";
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  bool check = false;
};

msmd::ExperimentConfig load(const Globals& g) {
  msmd::ExperimentConfig cfg;
  if (!g.config.empty()) cfg = msmd::load_config(g.config);
  if (g.workers) cfg.workers = *g.workers;
  if (g.seed) cfg.base_seed = *g.seed;
  cfg.validate();
  return cfg;
}

void emit(const Globals& g, const std::string& csv, const std::string& json) {
  const std::filesystem::path dir(g.out);
  if (!csv.empty()) msmd::write_file(dir / "results.csv", csv);
  msmd::write_file(dir / "report.json", json);
}

int report_failure(const std::optional<std::string>& failure) {
  if (!failure) return kOk;
  std::cerr << "numerical failure: " << *failure << '\n';
  return kNumericalFailure;
}

int do_run(const Globals& g, bool force_audit) {
  msmd::ExperimentConfig cfg = load(g);
  if (force_audit) cfg.audit = true;
  const msmd::BoundReport bounds = msmd::cmd_bounds(cfg);
  const msmd::RunReport report = msmd::cmd_run(cfg);
  emit(g, msmd::format_csv(report.rows, report.failure), msmd::run_report_json(cfg, bounds, report));

  std::printf("%s k = %lld, n = %zu, replicates = %zu\n", std::string(msmd::to_string(cfg.geometry)).c_str(),
              static_cast<long long>(cfg.k), cfg.n, report.rows.size());
  std::printf("  mean excess      %.6g (pooled se %.3g)\n", report.mean_excess, report.pooled_std_error);
  std::printf("  rate bound       %.6g\n", report.mean_bound_rate);
  if (cfg.audit) std::printf("  audit min slack  %.3g\n", report.audit_min_residual);
  if (const int rc = report_failure(report.failure)) return rc;

  if (g.check) {
    const bool within = report.mean_excess <= report.mean_bound_rate + 3.0 * report.pooled_std_error;
    const bool audit_ok = !cfg.audit || report.audit_min_residual >= -1e-9;
    std::printf("check: %s\n", within && audit_ok ? "PASS" : "FAIL");
    if (!(within && audit_ok)) return kCheckFailed;
  }
  return kOk;
}

int do_sweep(const Globals& g, const std::vector<long long>& grid_flag) {
  const msmd::ExperimentConfig cfg = load(g);
  std::vector<Eigen::Index> grid = cfg.k_grid;
  if (!grid_flag.empty()) grid.assign(grid_flag.begin(), grid_flag.end());
  const msmd::SweepResult result = msmd::cmd_sweep_k(cfg, grid);
  emit(g, msmd::format_csv(result.rows, result.failure), msmd::sweep_report_json(cfg, result));
  if (const int rc = report_failure(result.failure)) return rc;

  std::printf("%8s %14s %12s %12s\n", "k", "mean_excess", "pooled_se", "bound_rate");
  bool within = true;
  for (const auto& p : result.points) {
    std::printf("%8lld %14.6g %12.3g %12.6g\n", static_cast<long long>(p.k), p.mean_excess, p.pooled_std_error,
                p.bound_rate);
    within = within && p.mean_excess <= p.bound_rate + 3.0 * p.pooled_std_error;
  }
  std::printf("slope %.4f +- %.4f\n", result.fit.slope, result.fit.std_error);
  if (g.check) {
    std::printf("check: %s\n", within ? "PASS" : "FAIL");
    if (!within) return kCheckFailed;
  }
  return kOk;
}

int do_bounds(const Globals& g) {
  const msmd::ExperimentConfig cfg = load(g);
  const msmd::BoundReport report = msmd::cmd_bounds(cfg);
  emit(g, "", msmd::bound_report_json(report));
  std::cout << msmd::bound_report_json(report) << msmd::bound_report_text(report);
  return kOk;
}

int do_deviation(const Globals& g, std::optional<double> theta) {
  const msmd::ExperimentConfig cfg = load(g);
  const msmd::TailReport report = msmd::cmd_deviation(cfg, theta ? *theta : cfg.theta);
  emit(g, msmd::format_csv(report.rows, report.failure), msmd::tail_report_json(cfg, report));
  if (const int rc = report_failure(report.failure)) return rc;

  std::printf("theta %.3g: threshold %.6g\n", report.bounds.theta, report.bounds.deviation_threshold);
  std::printf("  exceed %zu / %zu = %.4f, bound %.4f (+ 3 sigma %.4f)\n", report.exceed_count, report.rows.size(),
              report.fraction, report.bounds.deviation_prob, report.binomial_band);
  if (g.check) {
    const bool ok = report.fraction <= report.bounds.deviation_prob + report.binomial_band;
    std::printf("check: %s\n", ok ? "PASS" : "FAIL");
    if (!ok) return kCheckFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic mirror descent experiments for multiclass margin classification"};
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config, "Experiment config file");
  app.add_option("--out", g.out, "Output directory for results.csv and report.json");
  app.add_option("--workers", g.workers, "Concurrent replicates")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Override run.base_seed");
  app.add_flag("--check", g.check, "Compare empirical results against the bounds");

  auto* run = app.add_subcommand("run", "Run replicates at the configured k")->fallthrough();
  auto* sweep = app.add_subcommand("sweep-k", "Run replicates across a grid of class counts")->fallthrough();
  std::vector<long long> grid;
  sweep->add_option("--k-grid", grid, "Class counts, overrides sweep.k_grid")->delimiter(',');
  auto* bounds = app.add_subcommand("bounds", "Print bound values without sampling")->fallthrough();
  auto* deviation = app.add_subcommand("deviation", "Measure the deviation tail over replicates")->fallthrough();
  std::optional<double> theta;
  deviation->add_option("--theta", theta, "Deviation parameter, overrides deviation.theta");
  auto* audit = app.add_subcommand("audit", "Run with the per-step inequality audit enabled")->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(g, false);
    if (*audit) return do_run(g, true);
    if (*sweep) return do_sweep(g, grid);
    if (*bounds) return do_bounds(g);
    if (*deviation) return do_deviation(g, theta);
  } catch (const msmd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const msmd::InvalidInput& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const msmd::ConstructionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const msmd::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}
