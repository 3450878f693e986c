#pragma once

// Closed-form risk bounds for stochastic mirror descent on the multiclass
// hinge loss.

#include <optional>

#include "msmd/smd.hpp"
#include "msmd/types.hpp"

namespace msmd {

struct BoundInputs {
  double omega = 1.0;
  double x_bound = 1.0;
  double rho = 1.0;
  Eigen::Index k = 2;
  std::size_t n = 1;
  std::optional<double> sigma2;
  std::optional<double> theta;
  std::optional<double> g_bar;
};

// Class prior p, optionally with an estimate p_hat satisfying p <= (1 + eps) p_hat.
class ClassPrior {
 public:
  struct Estimate {
    Vector p_hat;
    double epsilon = 0.0;
  };

  explicit ClassPrior(Vector p, std::optional<Estimate> estimate = std::nullopt);

  static ClassPrior uniform(Eigen::Index k);

  const Vector& p() const { return p_; }
  Eigen::Index classes() const { return p_.size(); }
  const std::optional<Estimate>& estimate() const { return estimate_; }
  // p_hat when an estimate is attached, p otherwise.
  const Vector& working() const { return estimate_ ? estimate_->p_hat : p_; }
  double epsilon() const { return estimate_ ? estimate_->epsilon : 0.0; }

 private:
  Vector p_;
  std::optional<Estimate> estimate_;
};

struct BoundConstants {
  double U = 0.0;
  double G = 0.0;
};

// (U^2 + G^2 sum alpha^2 / 2) / sum alpha
double oracle_bound(double U, double G, const StepSchedule& schedule);

BoundConstants euclid_constants(const BoundInputs& inp);
BoundConstants l1l2_constants(const BoundInputs& inp);
// U^2 = B omega^2 / 2 and G^2 = 2 (1 + eps) B X^2 / rho^2 with B = sum sqrt(p_hat).
BoundConstants weighted_constants(const BoundInputs& inp, const ClassPrior& prior);

double rate_euclid(const BoundInputs& inp);
double rate_l1l2(const BoundInputs& inp);

struct DeviationBound {
  double threshold = 0.0;
  double prob = 0.0;
};

double deviation_probability(double theta);
DeviationBound deviation_bound(const BoundInputs& inp, double U, const StepSchedule& schedule);

// sum_y sqrt(p(y)) over the true prior.
double sqrt_prior_sum(const ClassPrior& prior);
// Uses p_hat and the (1 + eps) factor when the prior carries an estimate.
double rate_weighted(const BoundInputs& inp, const ClassPrior& prior);
double weighted_step(const BoundInputs& inp);

struct WeightedParameters {
  Vector b;  // norm weights sqrt(p)
  Vector c;  // scorer weights p^(1/4), rescaled to max 1
  bool degenerate = false;
};

WeightedParameters weighted_parameters(const ClassPrior& prior);

// sum_y p/b_y + p/c_y^2 max_y' c_y'^2 / b_y'
double bound_A(const ClassPrior& prior, const Vector& b, const Vector& c);
// 2 (1 + eps) sum sqrt(p_hat)
double bound_A_estimated(const ClassPrior& prior);

}  // namespace msmd
