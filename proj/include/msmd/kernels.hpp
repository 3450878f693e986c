#pragma once

// Data-parallel risk kernels. Each has a serial reference kept for tests and
// benchmarks. The OpenMP versions reduce fixed-size chunks in chunk order, so
// their output does not depend on the thread count.

#include <cstdint>
#include <span>

#include "msmd/core.hpp"

namespace msmd {

class Task;
struct RiskEstimate;

namespace kernels {

inline constexpr std::size_t kChunk = 1024;

RiskSummary sample_risk_serial(std::span<const Instance> sample, const WeightMatrix& w, const LossConfig& cfg);
RiskSummary sample_risk_omp(std::span<const Instance> sample, const WeightMatrix& w, const LossConfig& cfg);

RiskEstimate task_risk_serial(const Task& task, const WeightMatrix& w, const LossConfig& cfg, std::size_t n,
                              std::uint64_t seed);
RiskEstimate task_risk_omp(const Task& task, const WeightMatrix& w, const LossConfig& cfg, std::size_t n,
                           std::uint64_t seed);

// Allocation-free loss for the hot loops; `scores` is caller scratch of length k.
double hinge_at(const Vector& x, std::size_t y, const WeightMatrix& w, const LossConfig& cfg, Vector& scores,
                bool* misclassified = nullptr);

}  // namespace kernels
}  // namespace msmd
