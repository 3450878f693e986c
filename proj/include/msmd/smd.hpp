#pragma once

// Stochastic mirror descent over a pull-based instance stream.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "msmd/core.hpp"
#include "msmd/geometry.hpp"

namespace msmd {

enum class ScheduleKind { kConstant, kCustom };

class StepSchedule {
 public:
  static StepSchedule constant(double alpha, std::size_t n);
  static StepSchedule custom(std::vector<double> alphas);

  ScheduleKind kind() const { return kind_; }
  std::size_t size() const { return n_; }
  double at(std::size_t m) const { return kind_ == ScheduleKind::kConstant ? alpha_ : alphas_[m]; }
  double sum() const;
  double sum_squares() const;

 private:
  StepSchedule(ScheduleKind kind, double alpha, std::size_t n, std::vector<double> alphas)
      : kind_(kind), alpha_(alpha), n_(n), alphas_(std::move(alphas)) {}

  ScheduleKind kind_;
  double alpha_;
  std::size_t n_;
  std::vector<double> alphas_;
};

// alpha = sqrt(2) U / (G sqrt(n)).
StepSchedule constant_step(double U, double G, std::size_t n);

// Instance m is requested only after iterate m is fixed.
using InstanceSource = std::function<Instance(std::size_t)>;

struct RunOptions {
  bool audit = false;
  // Keeps every iterate; meant for small debug runs.
  bool keep_iterates = false;
  std::uint64_t seed = 0;
  // Known comparator (e.g. the synthetic anchor), used as the first audit probe.
  std::optional<WeightMatrix> comparator;
};

struct RunRecord {
  WeightMatrix final_average;
  std::vector<double> step_losses;
  // Per-step minimum residual of the one-step inequality over the probe set (audit only).
  std::vector<double> audit_residuals;
  // Minimum over probes of the slack in the summed step inequality (audit only).
  std::optional<double> summed_slack;
  std::vector<WeightMatrix> iterates;
  std::uint64_t seed = 0;
  std::size_t steps_taken = 0;
  double step_sum = 0.0;

  double audit_min() const;
};

// 20 probes: the comparator (or a random point), the origin, then random feasible points.
std::vector<WeightMatrix> make_audit_probes(const GeometrySpec& spec, const std::optional<WeightMatrix>& comparator,
                                            std::uint64_t seed);

// min over probes of [alpha <g, w - w_next> + D(w, w_m) - D(w_next, w_m) - D(w, w_next)].
double audit_step_inequality(const WeightMatrix& w_m, const WeightMatrix& w_next, const Subgradient& g, double alpha,
                             std::span<const WeightMatrix> probes, const GeometrySpec& spec);

RunRecord run(const InstanceSource& stream, const GeometrySpec& geometry, const StepSchedule& schedule,
              const LossConfig& cfg, const RunOptions& options = {});

RunRecord run(std::span<const Instance> stream, const GeometrySpec& geometry, const StepSchedule& schedule,
              const LossConfig& cfg, const RunOptions& options = {});

}  // namespace msmd
