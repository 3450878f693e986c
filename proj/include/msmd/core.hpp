#pragma once

// One-vs-all linear scorers, the multiclass margin and its hinge loss.
//
// Labels are 0-based in memory. Files and user-facing output use 1..k.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "msmd/types.hpp"

namespace msmd {

struct Instance {
  Vector x;
  std::size_t y = 0;
};

// Margin scale rho and the optional per-class scorer weights c (max c = 1).
class LossConfig {
 public:
  explicit LossConfig(double rho, std::optional<Vector> class_scale = std::nullopt);

  double rho() const { return rho_; }
  bool has_class_scale() const { return class_scale_.has_value(); }
  const std::optional<Vector>& class_scale() const { return class_scale_; }
  double scale(std::size_t y) const { return class_scale_ ? (*class_scale_)(static_cast<Eigen::Index>(y)) : 1.0; }

 private:
  double rho_;
  std::optional<Vector> class_scale_;
};

struct MarginResult {
  double value = 0.0;
  std::size_t competitor = 0;
};

struct BlockUpdate {
  std::size_t row = 0;
  Vector delta;
};

// A subgradient of the loss with respect to w. Nonzero on at most two rows.
struct Subgradient {
  bool active = false;
  std::size_t true_class = 0;
  std::size_t competitor = 0;
  std::vector<BlockUpdate> updates;

  // Frobenius inner product <g, m>.
  double dot(const WeightMatrix& m) const;
  // Sum of squared Euclidean row norms.
  double squared_norm() const;
  // out += scale * g
  void add_to(WeightMatrix& out, double scale = 1.0) const;
  WeightMatrix dense(Eigen::Index k, Eigen::Index d) const;
};

Vector score(const Vector& x, const WeightMatrix& w, const LossConfig& cfg);

// Ties between competitors go to the smallest label.
MarginResult margin(const Vector& x, std::size_t y, const WeightMatrix& w, const LossConfig& cfg);

double hinge_loss(double m, const LossConfig& cfg);

double loss(const Instance& inst, const WeightMatrix& w, const LossConfig& cfg);

// Zero subgradient on the kink m == rho.
Subgradient subgradient(const Instance& inst, const WeightMatrix& w, const LossConfig& cfg);

std::size_t predict(const Vector& x, const WeightMatrix& w, const LossConfig& cfg);

struct RiskSummary {
  double hinge = 0.0;
  double zero_one = 0.0;
};

// Mean hinge loss and 0-1 error over a sample (OpenMP kernel).
RiskSummary empirical_risk(std::span<const Instance> sample, const WeightMatrix& w, const LossConfig& cfg);

}  // namespace msmd
