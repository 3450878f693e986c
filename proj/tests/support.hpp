#pragma once

// Small helpers shared by the unit tests.

#include <random>

#include "msmd/core.hpp"
#include "msmd/geometry.hpp"

namespace msmd::testing {

inline WeightMatrix gaussian(Eigen::Index k, Eigen::Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  WeightMatrix w(k, d);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < d; ++j) w(i, j) = n(rng);
  return w;
}

inline Vector gaussian_vec(Eigen::Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(d);
  for (Eigen::Index j = 0; j < d; ++j) v(j) = n(rng);
  return v;
}

// Random point of the unit ball scaled by x_bound.
inline Vector in_ball(Eigen::Index d, double x_bound, std::mt19937_64& rng) {
  Vector v = gaussian_vec(d, rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return v * (x_bound * u(rng) / v.norm());
}

inline double block_norm(const WeightMatrix& w) { return w.norm(); }

}  // namespace msmd::testing
