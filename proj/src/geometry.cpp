#include "msmd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace msmd {

std::string_view to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::kEuclideanProduct:
      return "euclidean-product";
    case GeometryKind::kBlockPower:
      return "block-power";
    case GeometryKind::kWeightedEuclidean:
      return "weighted-euclidean";
  }
  return "unknown";
}

GeometryKind parse_geometry_kind(std::string_view name) {
  if (name == "euclidean-product") return GeometryKind::kEuclideanProduct;
  if (name == "block-power") return GeometryKind::kBlockPower;
  if (name == "weighted-euclidean") return GeometryKind::kWeightedEuclidean;
  throw InvalidInput("unknown geometry kind '" + std::string(name) + "'");
}

GeometrySpec::GeometrySpec(GeometryKind kind, Eigen::Index k, Eigen::Index d, double omega, Vector weights)
    : kind_(kind), k_(k), d_(d), omega_(omega), weights_(std::move(weights)) {
  if (k_ < 2) throw InvalidInput("GeometrySpec: need k >= 2");
  if (d_ < 1) throw InvalidInput("GeometrySpec: need d >= 1");
  if (!(omega_ > 0.0) || !std::isfinite(omega_)) throw InvalidInput("GeometrySpec: omega must be positive");
  if (kind_ == GeometryKind::kWeightedEuclidean) {
    if (weights_.size() != k_) throw InvalidInput("GeometrySpec: block_weights must have k entries");
    for (Eigen::Index i = 0; i < k_; ++i) {
      if (!(weights_(i) > 0.0) || !std::isfinite(weights_(i)))
        throw InvalidInput("GeometrySpec: block_weights must be positive (zero-probability classes are degenerate)");
    }
  }
}

GeometrySpec GeometrySpec::euclidean_product(Eigen::Index k, Eigen::Index d, double omega) {
  return {GeometryKind::kEuclideanProduct, k, d, omega, Vector()};
}

GeometrySpec GeometrySpec::block_power(Eigen::Index k, Eigen::Index d, double omega) {
  return {GeometryKind::kBlockPower, k, d, omega, Vector()};
}

GeometrySpec GeometrySpec::weighted_euclidean(Eigen::Index k, Eigen::Index d, double omega, Vector block_weights) {
  return {GeometryKind::kWeightedEuclidean, k, d, omega, std::move(block_weights)};
}

double GeometrySpec::exponent() const { return 1.0 + 1.0 / std::log(static_cast<double>(k_)); }

double GeometrySpec::coefficient() const {
  const double lnk = std::log(static_cast<double>(k_));
  return std::numbers::e * lnk / (1.0 + 1.0 / lnk);
}

namespace {

void check_shape(const WeightMatrix& w, const GeometrySpec& spec) {
  if (w.rows() != spec.classes() || w.cols() != spec.dim())
    throw InvalidInput("weight matrix shape does not match the geometry");
}

// Radial projection of one block onto the ball of radius omega.
template <typename Row>
void clip_block(Row&& row, double omega) {
  const double nrm = row.norm();
  if (nrm > omega) row *= omega / nrm;
}

// Block-power prox in closed form per block given the multiplier lambda:
// block i = r_i z_i / |z_i| with r_i = ((|z_i| - lambda)_+ / (kappa q))^(1/(q-1)).
class BlockRadii {
 public:
  BlockRadii(const Vector& norms, double kappa_q, double q) : norms_(norms), kappa_q_(kappa_q), inv_(1.0 / (q - 1.0)) {}

  double radius(Eigen::Index i, double lambda) const {
    const double t = norms_(i) - lambda;
    return t > 0.0 ? std::pow(t / kappa_q_, inv_) : 0.0;
  }

  double total(double lambda) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < norms_.size(); ++i) s += radius(i, lambda);
    return s;
  }

 private:
  const Vector& norms_;
  double kappa_q_;
  double inv_;
};

WeightMatrix block_power_prox(WeightMatrix z, const GeometrySpec& spec) {
  constexpr int kMaxIter = 200;
  constexpr double kTol = 1e-10;
  const double q = spec.exponent();
  const double kappa_q = spec.coefficient() * q;
  const double omega = spec.omega();

  Vector norms = z.rowwise().norm();
  if (!norms.allFinite()) throw NumericalFailure("block-power prox: non-finite dual point", NAN);
  const BlockRadii radii(norms, kappa_q, q);

  double lambda = 0.0;
  if (radii.total(0.0) > omega) {
    double lo = 0.0;
    double hi = norms.maxCoeff();
    int it = 0;
    for (; it < kMaxIter; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (radii.total(mid) > omega)
        lo = mid;
      else
        hi = mid;
    }
    if (hi - lo > kTol * std::max(1.0, hi))
      throw NumericalFailure("block-power prox: multiplier bisection did not converge", hi - lo);
    lambda = hi;
  }

  Vector r(norms.size());
  for (Eigen::Index i = 0; i < norms.size(); ++i) r(i) = radii.radius(i, lambda);
  const double total = r.sum();
  if (total > omega) r *= omega / total;

  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (r(i) > 0.0)
      z.row(i) *= r(i) / norms(i);
    else
      z.row(i).setZero();
  }
  return z;
}

}  // namespace

double dgf_value(const WeightMatrix& w, const GeometrySpec& spec) {
  check_shape(w, spec);
  switch (spec.kind()) {
    case GeometryKind::kEuclideanProduct:
      return 0.5 * w.squaredNorm();
    case GeometryKind::kBlockPower: {
      const double q = spec.exponent();
      return spec.coefficient() * w.rowwise().norm().array().pow(q).sum();
    }
    case GeometryKind::kWeightedEuclidean:
      return 0.5 * spec.block_weights().dot(w.rowwise().squaredNorm());
  }
  return 0.0;
}

WeightMatrix dgf_grad(const WeightMatrix& w, const GeometrySpec& spec) {
  check_shape(w, spec);
  switch (spec.kind()) {
    case GeometryKind::kEuclideanProduct:
      return w;
    case GeometryKind::kBlockPower: {
      const double q = spec.exponent();
      const double kappa_q = spec.coefficient() * q;
      WeightMatrix g = w;
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const double nrm = w.row(i).norm();
        // The gradient vanishes at a zero block since q > 1.
        if (nrm > 0.0)
          g.row(i) *= kappa_q * std::pow(nrm, q - 2.0);
        else
          g.row(i).setZero();
      }
      return g;
    }
    case GeometryKind::kWeightedEuclidean:
      return spec.block_weights().asDiagonal() * w;
  }
  return w;
}

double bregman(const WeightMatrix& w1, const WeightMatrix& w2, const GeometrySpec& spec) {
  check_shape(w1, spec);
  check_shape(w2, spec);
  switch (spec.kind()) {
    case GeometryKind::kEuclideanProduct:
      return 0.5 * (w1 - w2).squaredNorm();
    case GeometryKind::kWeightedEuclidean:
      return 0.5 * spec.block_weights().dot((w1 - w2).rowwise().squaredNorm());
    case GeometryKind::kBlockPower: {
      // Blockwise to keep the cancellation local to each block.
      const double q = spec.exponent();
      const double kappa = spec.coefficient();
      double acc = 0.0;
      for (Eigen::Index i = 0; i < w1.rows(); ++i) {
        const double n1 = w1.row(i).norm();
        const double n2 = w2.row(i).norm();
        double term = kappa * (std::pow(n1, q) - std::pow(n2, q));
        if (n2 > 0.0) term -= kappa * q * std::pow(n2, q - 2.0) * w2.row(i).dot(w1.row(i) - w2.row(i));
        acc += std::max(term, 0.0);
      }
      return acc;
    }
  }
  return 0.0;
}

WeightMatrix initial_point(const GeometrySpec& spec) { return WeightMatrix::Zero(spec.classes(), spec.dim()); }

double capacity(const GeometrySpec& spec) {
  const double omega = spec.omega();
  const auto k = static_cast<double>(spec.classes());
  switch (spec.kind()) {
    case GeometryKind::kEuclideanProduct:
      return k * omega * omega;
    case GeometryKind::kBlockPower:
      return std::numbers::e * std::log(k) * omega;
    case GeometryKind::kWeightedEuclidean:
      return 0.5 * spec.block_weights().sum() * omega * omega;
  }
  return 0.0;
}

double dgf_range(const GeometrySpec& spec) {
  const double omega = spec.omega();
  const auto k = static_cast<double>(spec.classes());
  switch (spec.kind()) {
    case GeometryKind::kEuclideanProduct:
      return 0.5 * k * omega * omega;
    case GeometryKind::kBlockPower:
      // psi is convex and q-homogeneous, so its max over the l1/l2 ball sits on a vertex.
      return spec.coefficient() * std::pow(omega, spec.exponent());
    case GeometryKind::kWeightedEuclidean:
      return 0.5 * spec.block_weights().sum() * omega * omega;
  }
  return 0.0;
}

double constraint_value(const WeightMatrix& w, const GeometrySpec& spec) {
  check_shape(w, spec);
  const Vector norms = w.rowwise().norm();
  return spec.kind() == GeometryKind::kBlockPower ? norms.sum() : norms.maxCoeff();
}

bool is_feasible(const WeightMatrix& w, const GeometrySpec& spec, double tol) {
  return w.allFinite() && constraint_value(w, spec) <= spec.omega() + tol;
}

double primal_norm(const WeightMatrix& w, const GeometrySpec& spec) {
  check_shape(w, spec);
  switch (spec.kind()) {
    case GeometryKind::kEuclideanProduct:
      return w.norm();
    case GeometryKind::kBlockPower:
      return w.rowwise().norm().sum();
    case GeometryKind::kWeightedEuclidean:
      return std::sqrt(spec.block_weights().dot(w.rowwise().squaredNorm()));
  }
  return 0.0;
}

double dual_norm(const WeightMatrix& g, const GeometrySpec& spec) {
  check_shape(g, spec);
  switch (spec.kind()) {
    case GeometryKind::kEuclideanProduct:
      return g.norm();
    case GeometryKind::kBlockPower:
      return g.rowwise().norm().maxCoeff();
    case GeometryKind::kWeightedEuclidean:
      return std::sqrt((g.rowwise().squaredNorm().array() / spec.block_weights().array()).sum());
  }
  return 0.0;
}

double dual_norm(const Subgradient& g, const GeometrySpec& spec) {
  switch (spec.kind()) {
    case GeometryKind::kEuclideanProduct:
      return std::sqrt(g.squared_norm());
    case GeometryKind::kBlockPower: {
      double m = 0.0;
      for (const auto& u : g.updates) m = std::max(m, u.delta.norm());
      return m;
    }
    case GeometryKind::kWeightedEuclidean: {
      double acc = 0.0;
      for (const auto& u : g.updates) acc += u.delta.squaredNorm() / spec.block_weights()(static_cast<Eigen::Index>(u.row));
      return std::sqrt(acc);
    }
  }
  return 0.0;
}

WeightMatrix prox_step(const WeightMatrix& w_m, const WeightMatrix& g, double alpha, const GeometrySpec& spec) {
  check_shape(w_m, spec);
  check_shape(g, spec);
  if (!(alpha > 0.0)) throw InvalidInput("prox_step: alpha must be positive");
  switch (spec.kind()) {
    case GeometryKind::kEuclideanProduct: {
      WeightMatrix z = w_m - alpha * g;
      for (Eigen::Index i = 0; i < z.rows(); ++i) clip_block(z.row(i), spec.omega());
      return z;
    }
    case GeometryKind::kWeightedEuclidean: {
      WeightMatrix z = w_m - alpha * (spec.block_weights().cwiseInverse().asDiagonal() * g);
      for (Eigen::Index i = 0; i < z.rows(); ++i) clip_block(z.row(i), spec.omega());
      return z;
    }
    case GeometryKind::kBlockPower:
      return block_power_prox(dgf_grad(w_m, spec) - alpha * g, spec);
  }
  return w_m;
}

WeightMatrix prox_step(const WeightMatrix& w_m, const Subgradient& g, double alpha, const GeometrySpec& spec) {
  check_shape(w_m, spec);
  if (!(alpha > 0.0)) throw InvalidInput("prox_step: alpha must be positive");
  switch (spec.kind()) {
    case GeometryKind::kEuclideanProduct:
    case GeometryKind::kWeightedEuclidean: {
      // Separable across blocks: only rows carrying gradient mass move.
      WeightMatrix next = w_m;
      for (const auto& u : g.updates) {
        const auto i = static_cast<Eigen::Index>(u.row);
        const double scale = spec.kind() == GeometryKind::kWeightedEuclidean ? alpha / spec.block_weights()(i) : alpha;
        next.row(i) -= scale * u.delta.transpose();
        clip_block(next.row(i), spec.omega());
      }
      return next;
    }
    case GeometryKind::kBlockPower: {
      WeightMatrix z = dgf_grad(w_m, spec);
      g.add_to(z, -alpha);
      return block_power_prox(std::move(z), spec);
    }
  }
  return w_m;
}

WeightMatrix random_feasible(const GeometrySpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index k = spec.classes();
  const Eigen::Index d = spec.dim();
  const double omega = spec.omega();
  const bool boundary = unif(rng) < 0.25;

  WeightMatrix w(k, d);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) w(i, j) = normal(rng);
    const double nrm = w.row(i).norm();
    if (nrm > 0.0) w.row(i) /= nrm;
  }

  Vector radius(k);
  if (spec.kind() == GeometryKind::kBlockPower) {
    // Flat Dirichlet over the k blocks plus one slack coordinate.
    Vector e(k + 1);
    for (Eigen::Index i = 0; i <= k; ++i) e(i) = -std::log(1.0 - unif(rng));
    if (boundary) e(k) = 0.0;
    const double total = e.sum();
    radius = omega * e.head(k) / total;
  } else {
    for (Eigen::Index i = 0; i < k; ++i) radius(i) = omega * std::pow(unif(rng), 1.0 / static_cast<double>(d));
    if (boundary) radius(static_cast<Eigen::Index>(unif(rng) * static_cast<double>(k)) % k) = omega;
  }
  for (Eigen::Index i = 0; i < k; ++i) w.row(i) *= radius(i);
  return w;
}

}  // namespace msmd
