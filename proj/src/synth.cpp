#include "msmd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "msmd/kernels.hpp"
#include "msmd/rng.hpp"

namespace msmd {

ClassPrior power_law_prior(Eigen::Index k, double beta) {
  if (k < 2) throw InvalidInput("power_law_prior: need k >= 2");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidInput("power_law_prior: beta must be nonnegative");
  Vector p(k);
  for (Eigen::Index i = 0; i < k; ++i) p(i) = std::pow(static_cast<double>(i + 1), -beta);
  p /= p.sum();
  return ClassPrior(std::move(p));
}

ClassPrior with_estimated_prior(const ClassPrior& prior, double epsilon, std::uint64_t seed) {
  if (!(epsilon >= 0.0)) throw InvalidInput("with_estimated_prior: epsilon must be nonnegative");
  // p_hat = p e^delta / Z with |delta| <= ln(1 + eps) / 2, so p / p_hat = Z e^-delta <= 1 + eps.
  const double half = 0.5 * std::log1p(epsilon);
  SplitMix64 rng(derive_seed(seed, SeedTag::kPrior));
  Vector p_hat = prior.p();
  for (Eigen::Index i = 0; i < p_hat.size(); ++i) p_hat(i) *= std::exp(half * (2.0 * rng.uniform() - 1.0));
  p_hat /= p_hat.sum();
  return ClassPrior(prior.p(), ClassPrior::Estimate{std::move(p_hat), epsilon});
}

namespace {

// Regular simplex directions in the first k coordinates: pairwise inner product -1/(k-1).
WeightMatrix simplex_frame(Eigen::Index k, Eigen::Index d) {
  WeightMatrix u = WeightMatrix::Zero(k, d);
  const double scale = std::sqrt(static_cast<double>(k) / static_cast<double>(k - 1));
  for (Eigen::Index y = 0; y < k; ++y) {
    for (Eigen::Index j = 0; j < k; ++j) u(y, j) = scale * ((y == j ? 1.0 : 0.0) - 1.0 / static_cast<double>(k));
  }
  return u;
}

// More classes than dimensions: random unit vectors spread out by descending sum_{i<j} <u_i,u_j>^4.
WeightMatrix spread_frame(Eigen::Index k, Eigen::Index d, std::uint64_t seed) {
  WeightMatrix u(k, d);
  if (d == 1) {
    for (Eigen::Index y = 0; y < k; ++y) u(y, 0) = (y % 2 == 0) ? 1.0 : -1.0;
    return u;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index y = 0; y < k; ++y) {
    for (Eigen::Index j = 0; j < d; ++j) u(y, j) = normal(rng);
    u.row(y).normalize();
  }
  constexpr int kIters = 300;
  constexpr double kRate = 0.1;
  for (int it = 0; it < kIters; ++it) {
    const WeightMatrix gram = u * u.transpose();
    WeightMatrix grad = WeightMatrix::Zero(k, d);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        if (i != j) grad.row(i) += std::pow(gram(i, j), 3) * u.row(j);
      }
    }
    u -= kRate * grad;
    for (Eigen::Index y = 0; y < k; ++y) u.row(y).normalize();
  }
  return u;
}

WeightMatrix frame(Eigen::Index k, Eigen::Index d, std::uint64_t seed) {
  return d >= k ? simplex_frame(k, d) : spread_frame(k, d, derive_seed(seed, SeedTag::kTask));
}

double anchor_scale(const GeometrySpec& spec) {
  return spec.kind() == GeometryKind::kBlockPower ? spec.omega() / static_cast<double>(spec.classes()) : spec.omega();
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

Task::Task(const TaskParams& params, std::uint64_t seed)
    : k_(params.k),
      d_(params.d),
      x_bound_(params.x_bound),
      rho_star_(params.rho_star),
      prior_(params.prior),
      class_scale_(params.class_scale),
      seed_(seed) {}

double margin_ceiling(const TaskParams& params, const GeometrySpec& spec, std::uint64_t seed) {
  const Eigen::Index k = params.k;
  if (k < 2 || params.d < 1) throw InvalidInput("margin_ceiling: need k >= 2 and d >= 1");
  const WeightMatrix u = frame(k, params.d, seed);
  const WeightMatrix w = anchor_scale(spec) * u;
  auto c = [&](Eigen::Index y) { return params.class_scale ? (*params.class_scale)(y) : 1.0; };
  double best = INFINITY;
  for (Eigen::Index y = 0; y < k; ++y)
    for (Eigen::Index j = 0; j < k; ++j)
      if (j != y) best = std::min(best, (c(y) * w.row(y) - c(j) * w.row(j)).dot(u.row(y)));
  return params.x_bound * best;
}

Task make_task(const TaskParams& params, const GeometrySpec& spec, std::uint64_t seed) {
  const Eigen::Index k = params.k;
  const Eigen::Index d = params.d;
  if (k < 2 || d < 1) throw InvalidInput("make_task: need k >= 2 and d >= 1");
  if (spec.classes() != k || spec.dim() != d) throw InvalidInput("make_task: geometry shape differs from task shape");
  if (params.prior.classes() != k) throw InvalidInput("make_task: prior has wrong length");
  if (!(params.x_bound > 0.0)) throw InvalidInput("make_task: x_bound must be positive");
  if (!(params.rho_star > 0.0)) throw InvalidInput("make_task: rho_star must be positive");
  if (params.class_scale) LossConfig(1.0, params.class_scale);  // validates c

  const double X = params.x_bound;
  if (params.rho_star > 2.0 * spec.omega() * X)
    throw ConstructionError("make_task: rho_star = " + fmt_double(params.rho_star) +
                            " exceeds the margin ceiling 2 omega X = " + fmt_double(2.0 * spec.omega() * X));

  Task task(params, seed);
  task.cumulative_.resize(static_cast<std::size_t>(k));
  double acc = 0.0;
  for (Eigen::Index y = 0; y < k; ++y) task.cumulative_[static_cast<std::size_t>(y)] = (acc += params.prior.p()(y));

  task.directions_ = frame(k, d, seed);
  task.anchor_ = anchor_scale(spec) * task.directions_;
  if (!is_feasible(task.anchor_, spec, 1e-12))
    throw ConstructionError("make_task: anchor is infeasible in the " + std::string(to_string(spec.kind())) + " set");

  // Aim slightly above rho_star so rounding in the sampler cannot eat the guarantee.
  const double target = params.rho_star * (1.0 + 1e-9);
  auto c = [&](Eigen::Index y) { return params.class_scale ? (*params.class_scale)(y) : 1.0; };
  task.cap_.resize(k);
  for (Eigen::Index y = 0; y < k; ++y) {
    const Vector u = task.directions_.row(y).transpose();
    double phi = d >= 2 ? M_PI / 2 : 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == y) continue;
      const Vector diff = (c(y) * task.anchor_.row(y) - c(j) * task.anchor_.row(j)).transpose();
      // margin >= X (A cos(phi) - B sin(phi)) = X R cos(phi + theta)
      const double A = diff.dot(u);
      const double B = (diff - A * u).norm();
      if (X * A < target)
        throw ConstructionError("make_task: rho_star = " + fmt_double(params.rho_star) + " exceeds the margin " +
                                fmt_double(X * A) + " reachable between classes " + std::to_string(y + 1) + " and " +
                                std::to_string(j + 1));
      const double R = std::hypot(A, B);
      const double theta = std::atan2(B, A);
      phi = std::min(phi, std::acos(std::min(1.0, target / (X * R))) - theta);
    }
    task.cap_(y) = std::max(0.0, phi);
  }
  return task;
}

void Task::draw_into(std::uint64_t seed, std::size_t index, Instance& out) const {
  SplitMix64 rng(mix_seed(seed, index));
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t y = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  const auto yi = static_cast<Eigen::Index>(y);

  out.y = y;
  out.x.resize(d_);
  const double phi = cap_(yi) * rng.uniform();
  if (d_ < 2 || phi == 0.0) {
    out.x = x_bound_ * directions_.row(yi).transpose();
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    double nv = 0.0;
    do {
      for (Eigen::Index j = 0; j < d_; ++j) out.x(j) = normal(rng);
      out.x -= out.x.dot(directions_.row(yi).transpose()) * directions_.row(yi).transpose();
      nv = out.x.norm();
    } while (nv < 1e-8);
    out.x *= x_bound_ * std::sin(phi) / nv;
    out.x += (x_bound_ * std::cos(phi)) * directions_.row(yi).transpose();
  }
  double nx = out.x.norm();
  while (nx > x_bound_) {
    out.x *= (x_bound_ / nx) * (1.0 - 0x1.0p-52);
    nx = out.x.norm();
  }
}

Instance Task::draw(std::uint64_t seed, std::size_t index) const {
  Instance inst;
  draw_into(seed, index, inst);
  return inst;
}

std::vector<Instance> sample(const Task& task, std::size_t n, std::uint64_t seed) {
  std::vector<Instance> out(n);
  for (std::size_t i = 0; i < n; ++i) task.draw_into(seed, i, out[i]);
  return out;
}

RiskEstimate estimate_risk(const Task& task, const WeightMatrix& w, const LossConfig& cfg, std::size_t n_mc,
                           std::uint64_t seed) {
  if (n_mc == 0) throw InvalidInput("estimate_risk: need n_mc >= 1");
  return kernels::task_risk_omp(task, w, cfg, n_mc, seed);
}

}  // namespace msmd
