#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msmd {

using Vector = Eigen::VectorXd;

// k blocks (rows) of length d; row y is the scorer of class y.
using WeightMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an iterative inner solver does not reach its tolerance.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double residual, long step = -1)
      : std::runtime_error(what), residual_(residual), step_(step) {}

  double residual() const noexcept { return residual_; }
  long step() const noexcept { return step_; }

 private:
  double residual_;
  long step_;
};

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace msmd
