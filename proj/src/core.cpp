#include "msmd/core.hpp"

#include <cmath>
#include <limits>

#include "msmd/kernels.hpp"

namespace msmd {

LossConfig::LossConfig(double rho, std::optional<Vector> class_scale)
    : rho_(rho), class_scale_(std::move(class_scale)) {
  if (!(rho_ > 0.0) || !std::isfinite(rho_)) throw InvalidInput("LossConfig: rho must be positive and finite");
  if (class_scale_) {
    const Vector& c = *class_scale_;
    if (c.size() == 0) throw InvalidInput("LossConfig: empty class_scale");
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (!(c(i) > 0.0) || !std::isfinite(c(i))) throw InvalidInput("LossConfig: class_scale entries must be positive");
    }
    if (std::abs(c.maxCoeff() - 1.0) > 1e-12) throw InvalidInput("LossConfig: class_scale must have max entry 1");
  }
}

namespace {

void check_shapes(const Vector& x, const WeightMatrix& w, const LossConfig& cfg) {
  if (x.size() != w.cols()) throw InvalidInput("dimension mismatch between instance and weight blocks");
  if (cfg.class_scale() && cfg.class_scale()->size() != w.rows())
    throw InvalidInput("class_scale length differs from the number of classes");
}

}  // namespace

Vector score(const Vector& x, const WeightMatrix& w, const LossConfig& cfg) {
  check_shapes(x, w, cfg);
  Vector s = w * x;
  if (cfg.class_scale()) s.array() *= cfg.class_scale()->array();
  return s;
}

MarginResult margin(const Vector& x, std::size_t y, const WeightMatrix& w, const LossConfig& cfg) {
  const auto k = static_cast<std::size_t>(w.rows());
  if (k < 2) throw InvalidInput("margin needs at least two classes");
  if (y >= k) throw InvalidInput("label out of range");
  const Vector s = score(x, w, cfg);
  MarginResult r;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    if (j == y) continue;
    const double v = s(static_cast<Eigen::Index>(j));
    if (v > best) {
      best = v;
      r.competitor = j;
    }
  }
  r.value = s(static_cast<Eigen::Index>(y)) - best;
  return r;
}

double hinge_loss(double m, const LossConfig& cfg) { return std::max(0.0, 1.0 - m / cfg.rho()); }

double loss(const Instance& inst, const WeightMatrix& w, const LossConfig& cfg) {
  return hinge_loss(margin(inst.x, inst.y, w, cfg).value, cfg);
}

Subgradient subgradient(const Instance& inst, const WeightMatrix& w, const LossConfig& cfg) {
  const MarginResult m = margin(inst.x, inst.y, w, cfg);
  Subgradient g;
  g.true_class = inst.y;
  g.competitor = m.competitor;
  if (!(m.value < cfg.rho())) return g;
  g.active = true;
  g.updates.push_back({inst.y, (-cfg.scale(inst.y) / cfg.rho()) * inst.x});
  g.updates.push_back({m.competitor, (cfg.scale(m.competitor) / cfg.rho()) * inst.x});
  return g;
}

std::size_t predict(const Vector& x, const WeightMatrix& w, const LossConfig& cfg) {
  const Vector s = score(x, w, cfg);
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < s.size(); ++j) {
    if (s(j) > s(best)) best = j;
  }
  return static_cast<std::size_t>(best);
}

double Subgradient::dot(const WeightMatrix& m) const {
  double acc = 0.0;
  for (const auto& u : updates) acc += m.row(static_cast<Eigen::Index>(u.row)).dot(u.delta.transpose());
  return acc;
}

double Subgradient::squared_norm() const {
  double acc = 0.0;
  for (const auto& u : updates) acc += u.delta.squaredNorm();
  return acc;
}

void Subgradient::add_to(WeightMatrix& out, double scale) const {
  for (const auto& u : updates) out.row(static_cast<Eigen::Index>(u.row)) += scale * u.delta.transpose();
}

WeightMatrix Subgradient::dense(Eigen::Index k, Eigen::Index d) const {
  WeightMatrix g = WeightMatrix::Zero(k, d);
  add_to(g);
  return g;
}

RiskSummary empirical_risk(std::span<const Instance> sample, const WeightMatrix& w, const LossConfig& cfg) {
  return kernels::sample_risk_omp(sample, w, cfg);
}

}  // namespace msmd
