#include "msmd/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "msmd/synth.hpp"

namespace msmd::kernels {

double hinge_at(const Vector& x, std::size_t y, const WeightMatrix& w, const LossConfig& cfg, Vector& scores,
                bool* misclassified) {
  scores.noalias() = w * x;
  if (cfg.class_scale()) scores.array() *= cfg.class_scale()->array();
  const auto yi = static_cast<Eigen::Index>(y);
  double rival = -INFINITY;
  Eigen::Index best = 0;
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    if (j != yi && scores(j) > rival) rival = scores(j);
    if (scores(j) > scores(best)) best = j;
  }
  if (misclassified) *misclassified = best != yi;
  return std::max(0.0, 1.0 - (scores(yi) - rival) / cfg.rho());
}

namespace {

struct Partial {
  double loss = 0.0;
  double loss_sq = 0.0;
  double errors = 0.0;
};

std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

RiskEstimate finish(const Partial& total, std::size_t n) {
  const auto nd = static_cast<double>(n);
  RiskEstimate out;
  out.mean = total.loss / nd;
  if (n > 1) {
    const double var = std::max(0.0, (total.loss_sq - nd * out.mean * out.mean) / (nd - 1.0));
    out.std_error = std::sqrt(var / nd);
  }
  return out;
}

Partial sum_in_order(const std::vector<Partial>& parts) {
  Partial total;
  for (const auto& p : parts) {
    total.loss += p.loss;
    total.loss_sq += p.loss_sq;
    total.errors += p.errors;
  }
  return total;
}

void check_sample(std::span<const Instance> sample, const WeightMatrix& w) {
  if (sample.empty()) throw InvalidInput("empirical_risk: empty sample");
  if (w.rows() < 2) throw InvalidInput("empirical_risk: need at least two classes");
  for (const auto& inst : sample) {
    if (inst.x.size() != w.cols()) throw InvalidInput("empirical_risk: dimension mismatch");
    if (inst.y >= static_cast<std::size_t>(w.rows())) throw InvalidInput("empirical_risk: label out of range");
  }
}

}  // namespace

RiskSummary sample_risk_serial(std::span<const Instance> sample, const WeightMatrix& w, const LossConfig& cfg) {
  check_sample(sample, w);
  Vector scores(w.rows());
  double loss = 0.0;
  double errors = 0.0;
  for (const auto& inst : sample) {
    bool wrong = false;
    loss += hinge_at(inst.x, inst.y, w, cfg, scores, &wrong);
    errors += wrong ? 1.0 : 0.0;
  }
  const auto n = static_cast<double>(sample.size());
  return {loss / n, errors / n};
}

RiskSummary sample_risk_omp(std::span<const Instance> sample, const WeightMatrix& w, const LossConfig& cfg) {
  check_sample(sample, w);
  const std::size_t n = sample.size();
  const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(n));
  std::vector<Partial> parts(static_cast<std::size_t>(chunks));

#pragma omp parallel
  {
    Vector scores(w.rows());
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
      Partial p;
      const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
      const std::size_t end = std::min(n, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) {
        bool wrong = false;
        p.loss += hinge_at(sample[i].x, sample[i].y, w, cfg, scores, &wrong);
        p.errors += wrong ? 1.0 : 0.0;
      }
      parts[static_cast<std::size_t>(c)] = p;
    }
  }
  const Partial total = sum_in_order(parts);
  const auto nd = static_cast<double>(n);
  return {total.loss / nd, total.errors / nd};
}

RiskEstimate task_risk_serial(const Task& task, const WeightMatrix& w, const LossConfig& cfg, std::size_t n,
                              std::uint64_t seed) {
  if (n == 0) throw InvalidInput("task risk: need at least one sample");
  Vector scores(w.rows());
  Instance inst;
  Partial total;
  for (std::size_t i = 0; i < n; ++i) {
    task.draw_into(seed, i, inst);
    const double l = hinge_at(inst.x, inst.y, w, cfg, scores);
    total.loss += l;
    total.loss_sq += l * l;
  }
  return finish(total, n);
}

RiskEstimate task_risk_omp(const Task& task, const WeightMatrix& w, const LossConfig& cfg, std::size_t n,
                           std::uint64_t seed) {
  if (n == 0) throw InvalidInput("task risk: need at least one sample");
  const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(n));
  std::vector<Partial> parts(static_cast<std::size_t>(chunks));

#pragma omp parallel
  {
    Vector scores(w.rows());
    Instance inst;
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
      Partial p;
      const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
      const std::size_t end = std::min(n, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) {
        task.draw_into(seed, i, inst);
        const double l = hinge_at(inst.x, inst.y, w, cfg, scores);
        p.loss += l;
        p.loss_sq += l * l;
      }
      parts[static_cast<std::size_t>(c)] = p;
    }
  }
  return finish(sum_in_order(parts), n);
}

}  // namespace msmd::kernels
