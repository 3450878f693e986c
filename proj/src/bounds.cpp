#include "msmd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace msmd {

namespace {

void check_distribution(const Vector& p, const char* what) {
  if (p.size() < 1) throw InvalidInput(std::string(what) + ": empty prior");
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p(i) >= 0.0) || !std::isfinite(p(i))) throw InvalidInput(std::string(what) + ": negative probability");
  }
  if (std::abs(p.sum() - 1.0) > 1e-12) throw InvalidInput(std::string(what) + ": probabilities must sum to 1");
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string(what) + " must be positive");
}

void check_basic(const BoundInputs& inp) {
  check_positive(inp.omega, "omega");
  check_positive(inp.x_bound, "x_bound");
  check_positive(inp.rho, "rho");
}

double sqrt_n(const BoundInputs& inp) { return std::sqrt(static_cast<double>(inp.n)); }

// sum sqrt(p_hat), or sum sqrt(p) without an estimate.
double working_sqrt_sum(const ClassPrior& prior) { return prior.working().array().sqrt().sum(); }

}  // namespace

ClassPrior::ClassPrior(Vector p, std::optional<Estimate> estimate) : p_(std::move(p)), estimate_(std::move(estimate)) {
  check_distribution(p_, "ClassPrior");
  if (estimate_) {
    check_distribution(estimate_->p_hat, "ClassPrior estimate");
    if (estimate_->p_hat.size() != p_.size()) throw InvalidInput("ClassPrior: estimate has wrong length");
    if (!(estimate_->epsilon >= 0.0)) throw InvalidInput("ClassPrior: epsilon must be nonnegative");
    for (Eigen::Index i = 0; i < p_.size(); ++i) {
      if (p_(i) > (1.0 + estimate_->epsilon) * estimate_->p_hat(i) * (1.0 + 1e-12))
        throw InvalidInput("ClassPrior: p <= (1 + eps) p_hat violated");
    }
  }
}

ClassPrior ClassPrior::uniform(Eigen::Index k) {
  if (k < 1) throw InvalidInput("uniform prior needs k >= 1");
  return ClassPrior(Vector::Constant(k, 1.0 / static_cast<double>(k)));
}

double oracle_bound(double U, double G, const StepSchedule& schedule) {
  if (schedule.size() == 0) throw InvalidInput("oracle_bound: empty schedule");
  check_positive(U, "U");
  check_positive(G, "G");
  return (U * U + 0.5 * G * G * schedule.sum_squares()) / schedule.sum();
}

BoundConstants euclid_constants(const BoundInputs& inp) {
  check_basic(inp);
  return {inp.omega * std::sqrt(static_cast<double>(inp.k)), std::sqrt(2.0) * inp.x_bound / inp.rho};
}

BoundConstants l1l2_constants(const BoundInputs& inp) {
  check_basic(inp);
  if (inp.k < 2) throw InvalidInput("l1l2_constants: need k >= 2");
  const double lnk = std::log(static_cast<double>(inp.k));
  return {std::sqrt(std::numbers::e * lnk * inp.omega), inp.x_bound / inp.rho};
}

BoundConstants weighted_constants(const BoundInputs& inp, const ClassPrior& prior) {
  check_basic(inp);
  const double B = working_sqrt_sum(prior);
  return {inp.omega * std::sqrt(0.5 * B), std::sqrt(2.0 * (1.0 + prior.epsilon()) * B) * inp.x_bound / inp.rho};
}

double rate_euclid(const BoundInputs& inp) {
  check_basic(inp);
  return 2.0 * inp.omega * inp.x_bound / inp.rho * std::sqrt(static_cast<double>(inp.k) / static_cast<double>(inp.n));
}

double rate_l1l2(const BoundInputs& inp) {
  check_basic(inp);
  if (inp.k < 2) throw InvalidInput("rate_l1l2: need k >= 2");
  const double lnk = std::log(static_cast<double>(inp.k));
  return inp.x_bound / inp.rho * std::sqrt(2.0 * std::numbers::e * inp.omega * lnk / static_cast<double>(inp.n));
}

double deviation_probability(double theta) { return std::exp(1.0 - theta) + std::exp(-theta * theta / 4.0); }

DeviationBound deviation_bound(const BoundInputs& inp, double U, const StepSchedule& schedule) {
  if (!inp.sigma2 || !inp.theta || !inp.g_bar) throw InvalidInput("deviation_bound: sigma2, theta and g_bar are required");
  if (!(*inp.theta > 0.0)) throw InvalidInput("deviation_bound: theta must be positive");
  if (schedule.size() == 0) throw InvalidInput("deviation_bound: empty schedule");
  const double sigma2 = *inp.sigma2;
  const double g = *inp.g_bar;
  const double theta = *inp.theta;

  // gamma_m = alpha_m / sum alpha
  const double total = schedule.sum();
  double alpha_gamma = 0.0;
  double gamma_sq = 0.0;
  for (std::size_t m = 0; m < schedule.size(); ++m) {
    const double a = schedule.at(m);
    alpha_gamma += a * a / total;
    gamma_sq += (a / total) * (a / total);
  }
  DeviationBound out;
  out.threshold = alpha_gamma * g * g + U * U / total + theta * (std::sqrt(U * sigma2 * gamma_sq) + alpha_gamma * sigma2);
  out.prob = deviation_probability(theta);
  return out;
}

double sqrt_prior_sum(const ClassPrior& prior) { return prior.p().array().sqrt().sum(); }

double rate_weighted(const BoundInputs& inp, const ClassPrior& prior) {
  check_basic(inp);
  return inp.omega * inp.x_bound * std::sqrt(2.0 * (1.0 + prior.epsilon())) / (inp.rho * sqrt_n(inp)) *
         working_sqrt_sum(prior);
}

double weighted_step(const BoundInputs& inp) {
  check_basic(inp);
  return inp.omega * inp.rho / (inp.x_bound * std::sqrt(2.0 * static_cast<double>(inp.n)));
}

WeightedParameters weighted_parameters(const ClassPrior& prior) {
  const Vector& p = prior.working();
  WeightedParameters out;
  out.b = p.array().sqrt();
  out.c = p.array().sqrt().sqrt();
  out.degenerate = (p.array() <= 0.0).any();
  const double cmax = out.c.maxCoeff();
  if (cmax > 0.0) out.c /= cmax;
  return out;
}

double bound_A(const ClassPrior& prior, const Vector& b, const Vector& c) {
  const Vector& p = prior.p();
  if (b.size() != p.size() || c.size() != p.size()) throw InvalidInput("bound_A: dimension mismatch");
  double ratio_max = 0.0;
  for (Eigen::Index y = 0; y < p.size(); ++y) {
    if (b(y) > 0.0) ratio_max = std::max(ratio_max, c(y) * c(y) / b(y));
  }
  double a = 0.0;
  for (Eigen::Index y = 0; y < p.size(); ++y) {
    if (p(y) <= 0.0) continue;
    a += p(y) / b(y) + p(y) / (c(y) * c(y)) * ratio_max;
  }
  return a;
}

double bound_A_estimated(const ClassPrior& prior) { return 2.0 * (1.0 + prior.epsilon()) * working_sqrt_sum(prior); }

}  // namespace msmd
