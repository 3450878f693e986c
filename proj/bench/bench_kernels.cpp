// Serial reference vs OpenMP risk kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "msmd/kernels.hpp"
#include "msmd/synth.hpp"

namespace {

using namespace msmd;

struct Fixture {
  Task task;
  WeightMatrix w;
  LossConfig cfg{0.5};
  std::vector<Instance> data;

  explicit Fixture(Eigen::Index k)
      : task([&] {
          TaskParams p;
          p.k = k;
          p.d = 64;
          p.rho_star = 0.5;
          p.prior = ClassPrior::uniform(k);
          return make_task(p, GeometrySpec::euclidean_product(k, 64, 1.0), 3);
        }()) {
    std::mt19937_64 rng(1);
    w = random_feasible(GeometrySpec::euclidean_product(k, 64, 1.0), rng);
    data = sample(task, 50000, 2);
  }
};

const Fixture& fixture(Eigen::Index k) {
  static const Fixture f4(4);
  static const Fixture f64(64);
  return k == 4 ? f4 : f64;
}

void task_risk_serial(benchmark::State& st) {
  const auto& f = fixture(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::task_risk_serial(f.task, f.w, f.cfg, 50000, 9).mean);
}

void task_risk_omp(benchmark::State& st) {
  const auto& f = fixture(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::task_risk_omp(f.task, f.w, f.cfg, 50000, 9).mean);
}

void sample_risk_serial(benchmark::State& st) {
  const auto& f = fixture(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::sample_risk_serial(f.data, f.w, f.cfg).hinge);
}

void sample_risk_omp(benchmark::State& st) {
  const auto& f = fixture(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::sample_risk_omp(f.data, f.w, f.cfg).hinge);
}

}  // namespace

BENCHMARK(task_risk_serial)->Arg(4)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(task_risk_omp)->Arg(4)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(sample_risk_serial)->Arg(4)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(sample_risk_omp)->Arg(4)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
