#pragma once

// Synthetic margin-separable tasks with a certified zero-risk anchor.
//
// Class y has a unit direction u_y and the anchor block w_y = a u_y, with a
// chosen so the anchor is feasible in the declared geometry. Features are
// drawn from a cap around u_y:
//
//   x = X (cos(phi) u_y + sin(phi) v),  v unit, v orthogonal to u_y,
//
// with phi uniform in [0, phi_max(y)] and phi_max(y) the largest angle for
// which every competitor j satisfies c_y <x, w_y> - c_j <x, w_j> >= rho_star.

#include <cstdint>
#include <optional>
#include <vector>

#include "msmd/bounds.hpp"
#include "msmd/core.hpp"
#include "msmd/geometry.hpp"

namespace msmd {

ClassPrior power_law_prior(Eigen::Index k, double beta);

// Attaches an estimate p_hat with p <= (1 + eps) p_hat. Deterministic in seed.
ClassPrior with_estimated_prior(const ClassPrior& prior, double epsilon, std::uint64_t seed);

struct TaskParams {
  Eigen::Index k = 2;
  Eigen::Index d = 2;
  double x_bound = 1.0;
  double rho_star = 1.0;
  ClassPrior prior = ClassPrior::uniform(2);
  // Scorer weights the margin guarantee must hold under; all ones when absent.
  std::optional<Vector> class_scale;
};

class Task {
 public:
  Eigen::Index classes() const { return k_; }
  Eigen::Index dim() const { return d_; }
  double x_bound() const { return x_bound_; }
  double rho_star() const { return rho_star_; }
  const ClassPrior& prior() const { return prior_; }
  const std::optional<Vector>& class_scale() const { return class_scale_; }
  const WeightMatrix& anchor() const { return anchor_; }
  // Row y is the unit direction of class y.
  const WeightMatrix& directions() const { return directions_; }
  double cap_angle(std::size_t y) const { return cap_(static_cast<Eigen::Index>(y)); }
  std::uint64_t seed() const { return seed_; }

  // Instance number `index` of the stream identified by `seed`.
  Instance draw(std::uint64_t seed, std::size_t index) const;
  void draw_into(std::uint64_t seed, std::size_t index, Instance& out) const;

 private:
  friend Task make_task(const TaskParams& params, const GeometrySpec& spec, std::uint64_t seed);
  Task(const TaskParams& params, std::uint64_t seed);

  Eigen::Index k_;
  Eigen::Index d_;
  double x_bound_;
  double rho_star_;
  ClassPrior prior_;
  std::optional<Vector> class_scale_;
  std::vector<double> cumulative_;
  WeightMatrix directions_;
  WeightMatrix anchor_;
  Vector cap_;
  std::uint64_t seed_;
};

// Smallest anchor margin X (c_y w_y - c_j w_j) . u_y over class pairs; the largest admissible rho_star.
// rho_star is ignored. Same seed as make_task.
double margin_ceiling(const TaskParams& params, const GeometrySpec& spec, std::uint64_t seed);

// Throws ConstructionError when rho_star is out of reach for the geometry.
Task make_task(const TaskParams& params, const GeometrySpec& spec, std::uint64_t seed);

std::vector<Instance> sample(const Task& task, std::size_t n, std::uint64_t seed);

struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of the expected hinge loss (OpenMP kernel).
RiskEstimate estimate_risk(const Task& task, const WeightMatrix& w, const LossConfig& cfg, std::size_t n_mc,
                           std::uint64_t seed);

}  // namespace msmd
