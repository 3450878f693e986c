#pragma once

// Seeded replicate execution, k-sweeps, deviation tails and bound reports.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "msmd/bounds.hpp"
#include "msmd/config.hpp"
#include "msmd/smd.hpp"
#include "msmd/synth.hpp"

namespace msmd {

inline constexpr std::uint64_t kSeedStride = 10007;

inline std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t r) {
  return base_seed + static_cast<std::uint64_t>(r) * kSeedStride;
}

// Everything one replicate needs, derived from the config for a class count k.
struct Setup {
  GeometrySpec geometry;
  LossConfig loss;
  ClassPrior prior;
  Task task;
  BoundConstants constants;
  BoundInputs inputs;
};

Setup make_setup(const ExperimentConfig& cfg, Eigen::Index k, std::uint64_t seed);

// Theory step schedule; empty when n == 0.
StepSchedule schedule_for(const Setup& setup, std::size_t n);

// Rate bound of the configured geometry.
double rate_bound(const Setup& setup);

// sup of the dual norm of any subgradient.
double gradient_bound(const Setup& setup);

// Monte Carlo max of |E g(w)|_* over the origin, the anchor and random feasible points.
double estimate_g_bar(const Setup& setup, std::uint64_t seed, std::size_t samples = 4000, std::size_t points = 8);

struct ReplicateRow {
  Eigen::Index k = 0;
  std::size_t n = 0;
  GeometryKind geometry = GeometryKind::kEuclideanProduct;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  double empirical_excess = 0.0;
  double std_error = 0.0;
  double bound_eq2 = 0.0;
  double bound_rate = 0.0;
  double audit_min_residual = 0.0;
  std::optional<double> summed_slack;
};

ReplicateRow run_replicate(const ExperimentConfig& cfg, Eigen::Index k, std::size_t r);

struct RunReport {
  std::vector<ReplicateRow> rows;
  double mean_excess = 0.0;
  double pooled_std_error = 0.0;
  double mean_bound_rate = 0.0;
  double audit_min_residual = 0.0;
  std::optional<std::string> failure;
};

RunReport cmd_run(const ExperimentConfig& cfg);

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
};

SlopeFit fit_log_slope(const std::vector<double>& ks, const std::vector<double>& values);

struct SweepPoint {
  Eigen::Index k = 0;
  double mean_excess = 0.0;
  double pooled_std_error = 0.0;
  double bound_rate = 0.0;
};

struct SweepResult {
  std::vector<ReplicateRow> rows;
  std::vector<SweepPoint> points;
  SlopeFit fit;
  std::optional<std::string> failure;
};

SweepResult cmd_sweep_k(const ExperimentConfig& cfg, const std::vector<Eigen::Index>& k_grid);

struct BoundReport {
  GeometryKind geometry = GeometryKind::kEuclideanProduct;
  Eigen::Index k = 0;
  std::size_t n = 0;
  double U = 0.0;
  double G = 0.0;
  double alpha = 0.0;
  double eq2_bound = 0.0;
  double constant_rate = 0.0;
  double deviation_threshold = 0.0;
  double deviation_prob = 0.0;
  double B = 0.0;
  double weighted_rate = 0.0;
  double theta = 0.0;
  double sigma2 = 0.0;
  double g_bar = 0.0;
  bool g_bar_estimated = false;
};

// sigma^2 = max(2 G_max, (2 G_max)^2)
double conservative_sigma2(double g_max);

// No sampling: g_bar comes from the config or falls back to the gradient bound.
BoundReport cmd_bounds(const ExperimentConfig& cfg);

struct TailReport {
  BoundReport bounds;
  std::vector<ReplicateRow> rows;
  std::size_t exceed_count = 0;
  double fraction = 0.0;
  double binomial_band = 0.0;
  std::optional<std::string> failure;
};

TailReport cmd_deviation(const ExperimentConfig& cfg, double theta);

// Output files and text summaries.
inline constexpr const char* kCsvHeader =
    "k,n,geometry,replicate,seed,empirical_excess,std_error,bound_eq2,bound_rate,audit_min_residual";

std::string format_csv(const std::vector<ReplicateRow>& rows, const std::optional<std::string>& failure);
void write_file(const std::filesystem::path& path, const std::string& content);

std::string bound_report_json(const BoundReport& report);
std::string bound_report_text(const BoundReport& report);
std::string run_report_json(const ExperimentConfig& cfg, const BoundReport& bounds, const RunReport& report);
std::string sweep_report_json(const ExperimentConfig& cfg, const SweepResult& result);
std::string tail_report_json(const ExperimentConfig& cfg, const TailReport& report);

}  // namespace msmd
