#include "msmd/smd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace msmd {

StepSchedule StepSchedule::constant(double alpha, std::size_t n) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidInput("step size must be positive");
  return {ScheduleKind::kConstant, alpha, n, {}};
}

StepSchedule StepSchedule::custom(std::vector<double> alphas) {
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInput("step sizes must be positive");
  }
  const std::size_t n = alphas.size();
  return {ScheduleKind::kCustom, 0.0, n, std::move(alphas)};
}

double StepSchedule::sum() const {
  if (kind_ == ScheduleKind::kConstant) return alpha_ * static_cast<double>(n_);
  return std::accumulate(alphas_.begin(), alphas_.end(), 0.0);
}

double StepSchedule::sum_squares() const {
  if (kind_ == ScheduleKind::kConstant) return alpha_ * alpha_ * static_cast<double>(n_);
  double s = 0.0;
  for (double a : alphas_) s += a * a;
  return s;
}

StepSchedule constant_step(double U, double G, std::size_t n) {
  if (!(U > 0.0) || !(G > 0.0) || n == 0) throw InvalidInput("constant_step: need U > 0, G > 0, n >= 1");
  return StepSchedule::constant(std::sqrt(2.0) * U / (G * std::sqrt(static_cast<double>(n))), n);
}

double RunRecord::audit_min() const {
  if (audit_residuals.empty()) return std::numeric_limits<double>::infinity();
  return *std::min_element(audit_residuals.begin(), audit_residuals.end());
}

std::vector<WeightMatrix> make_audit_probes(const GeometrySpec& spec, const std::optional<WeightMatrix>& comparator,
                                            std::uint64_t seed) {
  constexpr std::size_t kProbes = 20;
  std::mt19937_64 rng(seed);
  std::vector<WeightMatrix> probes;
  probes.reserve(kProbes);
  probes.push_back(comparator ? *comparator : random_feasible(spec, rng));
  probes.push_back(initial_point(spec));
  while (probes.size() < kProbes) probes.push_back(random_feasible(spec, rng));
  return probes;
}

double audit_step_inequality(const WeightMatrix& w_m, const WeightMatrix& w_next, const Subgradient& g, double alpha,
                             std::span<const WeightMatrix> probes, const GeometrySpec& spec) {
  const double move = bregman(w_next, w_m, spec);
  const double g_next = g.dot(w_next);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& w : probes) {
    const double rhs = alpha * (g.dot(w) - g_next) + bregman(w, w_m, spec) - move;
    worst = std::min(worst, rhs - bregman(w, w_next, spec));
  }
  return worst;
}

RunRecord run(const InstanceSource& stream, const GeometrySpec& geometry, const StepSchedule& schedule,
              const LossConfig& cfg, const RunOptions& options) {
  const std::size_t n = schedule.size();
  RunRecord rec;
  rec.seed = options.seed;
  rec.step_losses.reserve(n);

  WeightMatrix w = initial_point(geometry);
  const WeightMatrix w_first = w;
  rec.final_average = w;

  std::vector<WeightMatrix> probes;
  std::vector<double> probe_sums;
  double grad_sq_sum = 0.0;
  if (options.audit) {
    probes = make_audit_probes(geometry, options.comparator, options.seed);
    probe_sums.assign(probes.size(), 0.0);
    rec.audit_residuals.reserve(n);
  }

  double step_sum = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (options.keep_iterates) rec.iterates.push_back(w);
    const double alpha = schedule.at(m);

    // Weighted running average over w^1..w^n.
    step_sum += alpha;
    rec.final_average += (alpha / step_sum) * (w - rec.final_average);

    const Instance inst = stream(m);
    const MarginResult mr = margin(inst.x, inst.y, w, cfg);
    rec.step_losses.push_back(hinge_loss(mr.value, cfg));
    const Subgradient g = subgradient(inst, w, cfg);

    WeightMatrix next;
    if (!g.active) {
      next = w;
    } else {
      try {
        next = prox_step(w, g, alpha, geometry);
      } catch (const NumericalFailure& e) {
        throw NumericalFailure(std::string(e.what()) + " at step " + std::to_string(m + 1), e.residual(),
                               static_cast<long>(m + 1));
      }
    }

    if (options.audit) {
      rec.audit_residuals.push_back(audit_step_inequality(w, next, g, alpha, probes, geometry));
      const double gw = g.dot(w);
      for (std::size_t p = 0; p < probes.size(); ++p) probe_sums[p] += alpha * (g.dot(probes[p]) - gw);
      const double gn = dual_norm(g, geometry);
      grad_sq_sum += 0.5 * alpha * alpha * gn * gn;
    }
    w = std::move(next);
  }

  if (options.audit && !probes.empty()) {
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < probes.size(); ++p)
      slack = std::min(slack, probe_sums[p] + grad_sq_sum + bregman(probes[p], w_first, geometry));
    rec.summed_slack = slack;
  }
  rec.steps_taken = n;
  rec.step_sum = step_sum;
  return rec;
}

RunRecord run(std::span<const Instance> stream, const GeometrySpec& geometry, const StepSchedule& schedule,
              const LossConfig& cfg, const RunOptions& options) {
  if (stream.size() < schedule.size()) throw InvalidInput("stream is shorter than the step schedule");
  return run([stream](std::size_t m) { return stream[m]; }, geometry, schedule, cfg, options);
}

}  // namespace msmd
