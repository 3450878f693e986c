#pragma once

// Distance-generating functions, Bregman divergences and prox-mappings.
//
//   euclidean-product   psi(w) = 1/2 sum_i |w_i|^2,        W = {max_i |w_i| <= omega}
//   block-power         psi(w) = kappa sum_i |w_i|^q,       W = {sum_i |w_i| <= omega}
//                       q = 1 + 1/ln k, kappa = e ln k / q
//   weighted-euclidean  psi(w) = 1/2 sum_i b_i |w_i|^2,    W = {max_i |w_i| <= omega}
//
// All block norms are Euclidean.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "msmd/core.hpp"
#include "msmd/types.hpp"

namespace msmd {

enum class GeometryKind { kEuclideanProduct, kBlockPower, kWeightedEuclidean };

std::string_view to_string(GeometryKind kind);
GeometryKind parse_geometry_kind(std::string_view name);

class GeometrySpec {
 public:
  static GeometrySpec euclidean_product(Eigen::Index k, Eigen::Index d, double omega);
  static GeometrySpec block_power(Eigen::Index k, Eigen::Index d, double omega);
  static GeometrySpec weighted_euclidean(Eigen::Index k, Eigen::Index d, double omega, Vector block_weights);

  GeometryKind kind() const { return kind_; }
  double omega() const { return omega_; }
  Eigen::Index classes() const { return k_; }
  Eigen::Index dim() const { return d_; }
  const Vector& block_weights() const { return weights_; }

  // Block-power exponent q and coefficient kappa; both follow from k.
  double exponent() const;
  double coefficient() const;

 private:
  GeometrySpec(GeometryKind kind, Eigen::Index k, Eigen::Index d, double omega, Vector weights);

  GeometryKind kind_;
  Eigen::Index k_;
  Eigen::Index d_;
  double omega_;
  Vector weights_;
};

double dgf_value(const WeightMatrix& w, const GeometrySpec& spec);
WeightMatrix dgf_grad(const WeightMatrix& w, const GeometrySpec& spec);
double bregman(const WeightMatrix& w1, const WeightMatrix& w2, const GeometrySpec& spec);

WeightMatrix initial_point(const GeometrySpec& spec);

// Capacity U^2 as used in the rate formulas: k omega^2, e ln(k) omega, and
// 1/2 (sum b) omega^2.
double capacity(const GeometrySpec& spec);
// sup_W psi - inf_W psi, computed from the set itself.
double dgf_range(const GeometrySpec& spec);

// Constraint function: max block norm or sum of block norms.
double constraint_value(const WeightMatrix& w, const GeometrySpec& spec);
bool is_feasible(const WeightMatrix& w, const GeometrySpec& spec, double tol = 1e-8);

// Norm w.r.t. which psi is 1-strongly convex, and its dual.
double primal_norm(const WeightMatrix& w, const GeometrySpec& spec);
double dual_norm(const WeightMatrix& g, const GeometrySpec& spec);
double dual_norm(const Subgradient& g, const GeometrySpec& spec);

// argmin_{w in W} { Bregman(w, w_m) + alpha <g, w - w_m> }.
// Throws NumericalFailure if the block-power multiplier search stalls.
WeightMatrix prox_step(const WeightMatrix& w_m, const WeightMatrix& g, double alpha, const GeometrySpec& spec);
WeightMatrix prox_step(const WeightMatrix& w_m, const Subgradient& g, double alpha, const GeometrySpec& spec);

// Random point of W; about a quarter of the draws land on the boundary.
WeightMatrix random_feasible(const GeometrySpec& spec, std::mt19937_64& rng);

}  // namespace msmd
