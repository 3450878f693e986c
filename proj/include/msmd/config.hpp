#pragma once

// Experiment configuration: an INI-style file with the sections
//
//   [geometry]   kind, omega, block_weights
//   [task]       k, d, x_bound, rho_star, margin_fraction, prior, beta
//   [loss]       rho, class_scale, epsilon
//   [run]        n, replicates, base_seed, n_mc, audit, workers
//   [sweep]      k_grid
//   [deviation]  theta, g_bar
//
// Unknown sections or keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msmd/geometry.hpp"

namespace msmd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PriorKind { kUniform, kPowerLaw };
enum class ClassScaleMode { kNone, kWeighted, kWeightedEstimated };

struct ExperimentConfig {
  GeometryKind geometry = GeometryKind::kEuclideanProduct;
  double omega = 1.0;
  // Explicit block weights; derived from the prior (sqrt p) when absent.
  std::optional<std::vector<double>> block_weights;

  Eigen::Index k = 8;
  Eigen::Index d = 16;
  double x_bound = 1.0;
  double rho_star = 1.0;
  // When set, rho_star = rho = fraction * margin ceiling, recomputed for every k.
  std::optional<double> margin_fraction;
  PriorKind prior = PriorKind::kUniform;
  double beta = 3.0;

  double rho = 1.0;
  ClassScaleMode class_scale = ClassScaleMode::kNone;
  double epsilon = 0.0;

  std::size_t n = 1000;
  std::size_t replicates = 1;
  std::uint64_t base_seed = 1;
  std::size_t n_mc = 100000;
  bool audit = false;
  std::size_t workers = 1;

  std::vector<Eigen::Index> k_grid;

  double theta = 3.0;
  std::optional<double> g_bar;

  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string_view to_string(PriorKind kind);
std::string_view to_string(ClassScaleMode mode);

}  // namespace msmd
