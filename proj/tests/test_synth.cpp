#include <doctest.h>

#include <cmath>

#include "msmd/kernels.hpp"
#include "msmd/synth.hpp"

using namespace msmd;

namespace {

TaskParams params(Eigen::Index k, Eigen::Index d, double rho_star, ClassPrior prior) {
  TaskParams p;
  p.k = k;
  p.d = d;
  p.rho_star = rho_star;
  p.prior = std::move(prior);
  return p;
}

GeometrySpec spec_of(GeometryKind kind, Eigen::Index k, Eigen::Index d) {
  switch (kind) {
    case GeometryKind::kEuclideanProduct:
      return GeometrySpec::euclidean_product(k, d, 1.0);
    case GeometryKind::kBlockPower:
      return GeometrySpec::block_power(k, d, 1.0);
    case GeometryKind::kWeightedEuclidean:
      return GeometrySpec::weighted_euclidean(k, d, 1.0, ClassPrior::uniform(k).p().cwiseSqrt());
  }
  return GeometrySpec::euclidean_product(k, d, 1.0);
}

double min_margin_over(const Task& task, std::size_t n, std::uint64_t seed, double& max_norm) {
  const LossConfig cfg(task.rho_star(), task.class_scale());
  double worst = INFINITY;
  max_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Instance inst = task.draw(seed, i);
    worst = std::min(worst, margin(inst.x, inst.y, task.anchor(), cfg).value);
    max_norm = std::max(max_norm, inst.x.norm());
  }
  return worst;
}

}  // namespace

TEST_CASE("power-law prior") {
  const auto a = power_law_prior(2, 1.0);
  CHECK(a.p()(0) == doctest::Approx(2.0 / 3));
  CHECK(a.p()(1) == doctest::Approx(1.0 / 3));
  CHECK(power_law_prior(3, 0.0).p().isApproxToConstant(1.0 / 3));
  long double z = 0.0L;
  for (int j = 100; j >= 1; --j) z += 1.0L / (static_cast<long double>(j) * j * j);
  CHECK(power_law_prior(100, 3.0).p()(0) == doctest::Approx(static_cast<double>(1.0L / z)).epsilon(1e-12));
  CHECK(power_law_prior(100, 3.0).p()(0) == doctest::Approx(0.8319).epsilon(1e-4));
  CHECK_THROWS_AS(power_law_prior(1, 3.0), InvalidInput);
}

TEST_CASE("estimated prior is dominated") {
  const auto p = power_law_prior(50, 3.0);
  for (double eps : {0.0, 0.1, 0.5, 2.0}) {
    const auto est = with_estimated_prior(p, eps, 7);
    REQUIRE(est.estimate());
    CHECK(est.working().sum() == doctest::Approx(1.0));
    for (Eigen::Index i = 0; i < 50; ++i) CHECK(p.p()(i) <= (1 + eps) * est.working()(i) * (1 + 1e-12));
  }
  CHECK(with_estimated_prior(p, 0.0, 7).working().isApprox(p.p(), 1e-14));
}

TEST_CASE("two-class euclidean anchor") {
  const auto spec = GeometrySpec::euclidean_product(2, 2, 1.0);
  const auto tp = params(2, 2, 1.0, ClassPrior::uniform(2));
  const Task t = make_task(tp, spec, 3);
  CHECK(t.anchor().row(0).norm() == doctest::Approx(1.0));
  CHECK((t.anchor().row(0) + t.anchor().row(1)).norm() <= 1e-15);
  CHECK(margin_ceiling(tp, spec, 3) == doctest::Approx(2.0));
  double max_norm = 0.0;
  CHECK(min_margin_over(t, 100000, 11, max_norm) >= 1.0);
  CHECK(max_norm <= 1.0);
}

TEST_CASE("margin and norm guarantees across geometries and shapes") {
  for (auto kind : {GeometryKind::kEuclideanProduct, GeometryKind::kBlockPower, GeometryKind::kWeightedEuclidean}) {
    for (auto [k, d] : {std::pair<Eigen::Index, Eigen::Index>{3, 5}, {8, 16}, {12, 4}, {5, 1}}) {
      const auto spec = spec_of(kind, k, d);
      auto tp = params(k, d, 1.0, ClassPrior::uniform(k));
      const double ceiling = margin_ceiling(tp, spec, 21);
      if (ceiling <= 0.0) continue;
      tp.rho_star = 0.7 * ceiling;
      const Task t = make_task(tp, spec, 21);
      CHECK(is_feasible(t.anchor(), spec, 1e-12));
      double max_norm = 0.0;
      CHECK(min_margin_over(t, 20000, 5, max_norm) >= tp.rho_star);
      CHECK(max_norm <= tp.x_bound);
    }
  }
}

TEST_CASE("certified zero risk at the anchor") {
  for (auto kind : {GeometryKind::kEuclideanProduct, GeometryKind::kBlockPower, GeometryKind::kWeightedEuclidean}) {
    const auto spec = spec_of(kind, 6, 8);
    auto tp = params(6, 8, 1.0, power_law_prior(6, 1.5));
    tp.rho_star = 0.99 * margin_ceiling(tp, spec, 2);
    const Task t = make_task(tp, spec, 2);
    const auto r = estimate_risk(t, t.anchor(), LossConfig(tp.rho_star), 1000000, 9);
    CHECK(r.mean == 0.0);
    CHECK(r.std_error == 0.0);
    const auto smaller = estimate_risk(t, t.anchor(), LossConfig(0.5 * tp.rho_star), 1000, 9);
    CHECK(smaller.mean == 0.0);
  }
}

TEST_CASE("class-scaled tasks keep the certificate") {
  const auto prior = power_law_prior(16, 3.0);
  const auto wp = weighted_parameters(prior);
  const auto spec = GeometrySpec::weighted_euclidean(16, 16, 1.0, wp.b);
  auto tp = params(16, 16, 1.0, prior);
  tp.class_scale = wp.c;
  tp.rho_star = 0.5 * margin_ceiling(tp, spec, 4);
  REQUIRE(tp.rho_star > 0.0);
  const Task t = make_task(tp, spec, 4);
  const auto r = estimate_risk(t, t.anchor(), LossConfig(tp.rho_star, wp.c), 200000, 1);
  CHECK(r.mean == 0.0);
}

TEST_CASE("risk at the origin is one") {
  const auto spec = GeometrySpec::euclidean_product(4, 4, 1.0);
  const Task t = make_task(params(4, 4, 0.5, ClassPrior::uniform(4)), spec, 1);
  const auto r = estimate_risk(t, WeightMatrix::Zero(4, 4), LossConfig(0.5), 5000, 2);
  CHECK(r.mean == 1.0);
}

TEST_CASE("construction errors") {
  const auto spec = GeometrySpec::euclidean_product(3, 3, 1.0);
  CHECK_THROWS_AS(make_task(params(3, 3, 2.0 + 1e-6, ClassPrior::uniform(3)), spec, 1), ConstructionError);
  auto tp = params(3, 3, 1.0, ClassPrior::uniform(3));
  tp.rho_star = margin_ceiling(tp, spec, 1) * 1.01;
  CHECK_THROWS_AS(make_task(tp, spec, 1), ConstructionError);
  CHECK_THROWS_AS(make_task(params(3, 4, 0.5, ClassPrior::uniform(3)), spec, 1), InvalidInput);
  CHECK_THROWS_AS(make_task(params(3, 3, 0.5, ClassPrior::uniform(4)), spec, 1), InvalidInput);
}

TEST_CASE("sampling") {
  const auto spec = GeometrySpec::euclidean_product(2, 3, 1.0);
  const Task t = make_task(params(2, 3, 0.5, ClassPrior::uniform(2)), spec, 1);
  CHECK(sample(t, 0, 1).empty());

  const auto s = sample(t, 100000, 8);
  double ones = 0;
  for (const auto& inst : s) ones += inst.y == 0 ? 1.0 : 0.0;
  CHECK(std::abs(ones / 1e5 - 0.5) <= 3 * std::sqrt(0.25 / 1e5));

  const auto again = sample(t, 100, 8);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(again[i].y == s[i].y);
    CHECK(again[i].x == s[i].x);
  }

  Vector mass = Vector::Zero(2);
  mass(1) = 1.0;
  const Task pm = make_task(params(2, 3, 0.5, ClassPrior(mass)), spec, 1);
  for (const auto& inst : sample(pm, 1000, 2)) CHECK(inst.y == 1);
}

TEST_CASE("prior fidelity") {
  const auto prior = power_law_prior(20, 1.2);
  const auto spec = GeometrySpec::euclidean_product(20, 20, 1.0);
  const Task t = make_task(params(20, 20, 0.5, prior), spec, 6);
  std::vector<double> counts(20, 0.0);
  const std::size_t n = 100000;
  for (const auto& inst : sample(t, n, 3)) counts[inst.y] += 1.0;
  for (Eigen::Index y = 0; y < 20; ++y) {
    const double p = prior.p()(y);
    if (p < 1e-3) continue;
    const double sd = std::sqrt(p * (1 - p) / static_cast<double>(n));
    CHECK(std::abs(counts[static_cast<std::size_t>(y)] / static_cast<double>(n) - p) <= 4 * sd);
  }
}

TEST_CASE("risk estimates are deterministic") {
  const auto spec = GeometrySpec::block_power(5, 6, 1.0);
  auto tp = params(5, 6, 0.05, ClassPrior::uniform(5));
  const Task t = make_task(tp, spec, 3);
  std::mt19937_64 rng(1);
  const WeightMatrix w = random_feasible(spec, rng);
  const auto a = estimate_risk(t, w, LossConfig(0.05), 30000, 4);
  const auto b = estimate_risk(t, w, LossConfig(0.05), 30000, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.mean > 0.0);
}
