#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "msmd/bounds.hpp"
#include "msmd/synth.hpp"

using namespace msmd;

namespace {

BoundInputs unit_inputs(Eigen::Index k, std::size_t n) {
  BoundInputs inp;
  inp.k = k;
  inp.n = n;
  return inp;
}

// sum_{i<=k} i^(-s), summed from the small terms up.
long double partial_zeta(int k, long double s) {
  long double acc = 0.0L;
  for (int i = k; i >= 1; --i) acc += std::pow(static_cast<long double>(i), -s);
  return acc;
}

double power_law_B(int k) { return static_cast<double>(partial_zeta(k, 1.5L) / std::sqrt(partial_zeta(k, 3.0L))); }

ClassPrior random_prior(Eigen::Index k, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Vector p(k);
  for (Eigen::Index i = 0; i < k; ++i) p(i) = e(rng);
  return ClassPrior(p / p.sum());
}

}  // namespace

TEST_CASE("oracle bound examples") {
  CHECK(oracle_bound(1, 1, StepSchedule::constant(std::sqrt(2.0), 1)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(oracle_bound(1, 1, StepSchedule::constant(1e-9, 10)) > 1e7);
  CHECK_THROWS_AS(oracle_bound(1, 1, StepSchedule::custom({})), InvalidInput);
}

TEST_CASE("constant step gives sqrt(2) U G / sqrt(n)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int t = 0; t < 100; ++t) {
    const double U = u(rng);
    const double G = u(rng);
    const std::size_t n = 1 + rng() % 5000;
    const double want = std::sqrt(2.0) * U * G / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(oracle_bound(U, G, constant_step(U, G, n)) - want) <= 1e-12 * want);
  }
}

TEST_CASE("euclidean constants") {
  auto inp = unit_inputs(4, 1);
  auto c = euclid_constants(inp);
  CHECK(c.U == doctest::Approx(2.0));
  CHECK(c.G == doctest::Approx(std::sqrt(2.0)));
  inp.k = 100;
  inp.omega = 0.5;
  CHECK(euclid_constants(inp).U == doctest::Approx(5.0));
  inp.rho = 2.0;
  CHECK(euclid_constants(inp).G == doctest::Approx(std::sqrt(2.0) / 2));
}

TEST_CASE("l1/l2 constants") {
  auto inp = unit_inputs(8, 1);
  CHECK(l1l2_constants(inp).U == doctest::Approx(2.377).epsilon(1e-3));
  CHECK(l1l2_constants(inp).U == doctest::Approx(std::sqrt(std::numbers::e * std::log(8.0))));
  CHECK(l1l2_constants(inp).G == doctest::Approx(1.0));
  inp.k = 2;
  const double u2 = l1l2_constants(inp).U;
  inp.k = 1024;
  CHECK(l1l2_constants(inp).U / u2 == doctest::Approx(std::sqrt(10.0)));
  inp.k = 1;
  CHECK_THROWS_AS(l1l2_constants(inp), InvalidInput);
}

TEST_CASE("constant-step rates") {
  CHECK(rate_euclid(unit_inputs(4, 100)) == doctest::Approx(0.4));
  CHECK(rate_euclid(unit_inputs(16, 100)) == doctest::Approx(0.8));
  CHECK(rate_euclid(unit_inputs(4, 400)) == doctest::Approx(0.2));
  CHECK(rate_l1l2(unit_inputs(8, 100)) == doctest::Approx(0.3362).epsilon(1e-3));
  CHECK(rate_l1l2(unit_inputs(64, 100)) / rate_l1l2(unit_inputs(8, 100)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(rate_l1l2(unit_inputs(8, 400)) == doctest::Approx(rate_l1l2(unit_inputs(8, 100)) / 2));
  CHECK_THROWS_AS(rate_l1l2(unit_inputs(1, 100)), InvalidInput);
  // rates match the oracle bound at the theory step
  for (Eigen::Index k : {2, 8, 50}) {
    const auto inp = unit_inputs(k, 300);
    const auto e = euclid_constants(inp);
    CHECK(oracle_bound(e.U, e.G, constant_step(e.U, e.G, 300)) == doctest::Approx(rate_euclid(inp)));
    const auto l = l1l2_constants(inp);
    CHECK(oracle_bound(l.U, l.G, constant_step(l.U, l.G, 300)) == doctest::Approx(rate_l1l2(inp)));
  }
}

TEST_CASE("rates are monotone in n and k") {
  const ClassPrior dummy = ClassPrior::uniform(2);
  for (Eigen::Index k = 2; k <= 128; k *= 2) {
    for (std::size_t n = 10; n <= 10000; n *= 10) {
      const auto a = unit_inputs(k, n);
      const auto more_n = unit_inputs(k, n * 10);
      const auto more_k = unit_inputs(k * 2, n);
      CHECK(rate_euclid(more_n) <= rate_euclid(a));
      CHECK(rate_l1l2(more_n) <= rate_l1l2(a));
      CHECK(rate_euclid(more_k) >= rate_euclid(a));
      CHECK(rate_l1l2(more_k) >= rate_l1l2(a));
      CHECK(rate_weighted(more_n, ClassPrior::uniform(k)) <= rate_weighted(a, ClassPrior::uniform(k)));
      CHECK(rate_weighted(more_k, ClassPrior::uniform(k * 2)) >= rate_weighted(a, ClassPrior::uniform(k)));
    }
  }
}

TEST_CASE("deviation bound") {
  CHECK(deviation_probability(3.0) == doctest::Approx(std::exp(-2.0) + std::exp(-2.25)));
  CHECK(deviation_probability(3.0) == doctest::Approx(0.2407).epsilon(1e-3));
  CHECK(deviation_probability(60.0) < 1e-20);
  CHECK(deviation_probability(5.1) <= 0.05);
  CHECK(deviation_probability(0.0) == doctest::Approx(std::numbers::e + 1.0));
  for (double t = 0.0; t <= 20.0; t += 0.01) {
    CHECK(deviation_probability(t) <= std::numbers::e + 1.0);
    if (t >= 0.5) CHECK(deviation_probability(t) <= std::numbers::e);
  }

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.2, 4.0);
  for (int t = 0; t < 50; ++t) {
    BoundInputs inp = unit_inputs(4, 1 + rng() % 3000);
    const double U = u(rng);
    const double G = u(rng);
    inp.sigma2 = u(rng);
    inp.theta = u(rng);
    inp.g_bar = G;
    const auto n = static_cast<double>(inp.n);
    const auto dev = deviation_bound(inp, U, constant_step(U, G, inp.n));
    const double want = 3 * U * G / std::sqrt(2 * n) +
                        *inp.theta * (std::sqrt(U * *inp.sigma2 / n) + std::sqrt(2.0) * U * *inp.sigma2 / (G * std::sqrt(n)));
    CHECK(dev.threshold == doctest::Approx(want).epsilon(1e-10));
    CHECK(dev.prob == deviation_probability(*inp.theta));
  }

  BoundInputs inp = unit_inputs(4, 100);
  inp.sigma2 = 1.0;
  inp.g_bar = 1.0;
  CHECK_THROWS_AS(deviation_bound(inp, 1.0, constant_step(1, 1, 100)), InvalidInput);
  double last = 0.0;
  for (double t = 0.5; t < 10; t += 0.5) {
    inp.theta = t;
    const double th = deviation_bound(inp, 1.0, constant_step(1, 1, 100)).threshold;
    CHECK(th > last);
    last = th;
  }
}

TEST_CASE("sqrt prior sum") {
  CHECK(sqrt_prior_sum(ClassPrior::uniform(9)) == doctest::Approx(3.0));
  Vector mass = Vector::Zero(5);
  mass(2) = 1.0;
  CHECK(sqrt_prior_sum(ClassPrior(mass)) == doctest::Approx(1.0));

  CHECK(sqrt_prior_sum(power_law_prior(100, 3.0)) == doctest::Approx(power_law_B(100)).epsilon(1e-12));
  CHECK(power_law_B(100) == doctest::Approx(2.200803).epsilon(1e-6));
  CHECK(power_law_B(256) == doctest::Approx(2.268827).epsilon(1e-6));
  CHECK(power_law_B(1000) == doctest::Approx(2.325050).epsilon(1e-6));
  // increases toward zeta(1.5)/sqrt(zeta(3)) ~ 2.3827
  CHECK(power_law_B(1000) > power_law_B(100));
  CHECK(power_law_B(100000) < 2.3828);
}

TEST_CASE("sqrt prior sum never exceeds sqrt k") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng() % 200);
    CHECK(sqrt_prior_sum(random_prior(k, rng)) <= std::sqrt(static_cast<double>(k)) + 1e-12);
  }
}

TEST_CASE("weighted rate and step") {
  const auto uni = ClassPrior::uniform(16);
  const auto inp = unit_inputs(16, 400);
  CHECK(rate_weighted(inp, uni) == doctest::Approx(std::sqrt(2.0) * std::sqrt(16.0 / 400.0)));
  CHECK(rate_weighted(inp, uni) == doctest::Approx(std::sqrt(2.0) * rate_euclid(inp) / 2));

  const auto pl = power_law_prior(256, 3.0);
  CHECK(rate_weighted(unit_inputs(256, 10000), pl) == doctest::Approx(std::sqrt(2.0) * power_law_B(256) / 100));

  const ClassPrior same(pl.p(), ClassPrior::Estimate{pl.p(), 0.0});
  CHECK(rate_weighted(unit_inputs(256, 10000), same) == doctest::Approx(rate_weighted(unit_inputs(256, 10000), pl)));

  CHECK(weighted_step(unit_inputs(3, 2)) == doctest::Approx(0.5));
  CHECK(weighted_step(unit_inputs(3, 8)) == doctest::Approx(0.25));
  auto big = unit_inputs(3, 2);
  big.omega = 2.0;
  CHECK(weighted_step(big) == doctest::Approx(1.0));
}

TEST_CASE("weighted parameters") {
  const auto uni = weighted_parameters(ClassPrior::uniform(4));
  CHECK(uni.b.isApproxToConstant(0.5));
  CHECK(uni.c.isApproxToConstant(1.0));
  CHECK_FALSE(uni.degenerate);

  Vector mass = Vector::Zero(4);
  mass(0) = 1.0;
  const auto pm = weighted_parameters(ClassPrior(mass));
  CHECK(pm.degenerate);
  CHECK(pm.b(0) == 1.0);
  CHECK(pm.b.tail(3).isZero(0.0));

  Vector p(2);
  p << 0.64, 0.36;
  const auto two = weighted_parameters(ClassPrior(p));
  CHECK(two.b(0) == doctest::Approx(0.8));
  CHECK(two.b(1) == doctest::Approx(0.6));
  CHECK(two.c(0) == doctest::Approx(1.0));
  CHECK(two.c(1) == doctest::Approx(std::pow(0.36 / 0.64, 0.25)));
  CHECK(two.c(1) == doctest::Approx(0.866).epsilon(1e-3));
}

TEST_CASE("bound A") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const auto prior = random_prior(2 + static_cast<Eigen::Index>(rng() % 30), rng);
    const Vector root = prior.p().cwiseSqrt();
    const Vector c = root.cwiseSqrt();
    CHECK(bound_A(prior, root, c) == doctest::Approx(2 * sqrt_prior_sum(prior)));
  }
  const auto uni = ClassPrior::uniform(4);
  CHECK(bound_A(uni, uni.p().cwiseSqrt(), uni.p().cwiseSqrt().cwiseSqrt()) == doctest::Approx(4.0));

  const Vector p_hat = ClassPrior::uniform(4).p();
  const ClassPrior est(uni.p(), ClassPrior::Estimate{p_hat, 0.5});
  CHECK(bound_A_estimated(est) == doctest::Approx(2 * 1.5 * 2.0));
}

TEST_CASE("prior validation") {
  Vector bad(2);
  bad << 0.7, 0.7;
  CHECK_THROWS_AS(ClassPrior{bad}, InvalidInput);
  bad << -0.1, 1.1;
  CHECK_THROWS_AS(ClassPrior{bad}, InvalidInput);
}
