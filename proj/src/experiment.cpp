#include "msmd/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "msmd/rng.hpp"

namespace msmd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ClassPrior make_prior(const ExperimentConfig& cfg, Eigen::Index k, std::uint64_t seed) {
  ClassPrior prior = cfg.prior == PriorKind::kUniform ? ClassPrior::uniform(k) : power_law_prior(k, cfg.beta);
  if (cfg.class_scale == ClassScaleMode::kWeightedEstimated) prior = with_estimated_prior(prior, cfg.epsilon, seed);
  return prior;
}

GeometrySpec make_geometry(const ExperimentConfig& cfg, Eigen::Index k, const WeightedParameters& wp) {
  switch (cfg.geometry) {
    case GeometryKind::kEuclideanProduct:
      return GeometrySpec::euclidean_product(k, cfg.d, cfg.omega);
    case GeometryKind::kBlockPower:
      return GeometrySpec::block_power(k, cfg.d, cfg.omega);
    case GeometryKind::kWeightedEuclidean: {
      Vector b = wp.b;
      if (cfg.block_weights) b = Eigen::Map<const Vector>(cfg.block_weights->data(), k);
      return GeometrySpec::weighted_euclidean(k, cfg.d, cfg.omega, std::move(b));
    }
  }
  throw InvalidInput("unknown geometry");
}

// Sum of the two largest entries.
double top_two(const Vector& v) {
  double a = -kInf;
  double b = -kInf;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) > a) {
      b = a;
      a = v(i);
    } else if (v(i) > b) {
      b = v(i);
    }
  }
  return a + b;
}

// Runs fn(i) for i in [0, count) on `workers` threads; results land at index i.
template <typename Result>
std::vector<std::optional<Result>> run_jobs(std::size_t count, std::size_t workers,
                                            const std::function<Result(std::size_t)>& fn,
                                            std::optional<std::string>& failure) {
  std::vector<std::optional<Result>> out(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(workers))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const NumericalFailure& e) {
      if (!failure) failure = std::string(e.what());
    }
  }
  return out;
}

template <typename Result>
std::vector<Result> completed(const std::vector<std::optional<Result>>& v) {
  std::vector<Result> out;
  for (const auto& x : v)
    if (x) out.push_back(*x);
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Summary {
  double mean = 0.0;
  double pooled_se = 0.0;
  double mean_bound = 0.0;
  double audit_min = kInf;
};

Summary summarize(const std::vector<ReplicateRow>& rows) {
  Summary s;
  if (rows.empty()) return s;
  double se2 = 0.0;
  for (const auto& r : rows) {
    s.mean += r.empirical_excess;
    se2 += r.std_error * r.std_error;
    s.mean_bound += r.bound_rate;
    if (!std::isnan(r.audit_min_residual)) s.audit_min = std::min(s.audit_min, r.audit_min_residual);
  }
  const auto m = static_cast<double>(rows.size());
  s.mean /= m;
  s.mean_bound /= m;
  s.pooled_se = std::sqrt(se2) / m;
  return s;
}

}  // namespace

Setup make_setup(const ExperimentConfig& cfg, Eigen::Index k, std::uint64_t seed) {
  ClassPrior prior = make_prior(cfg, k, seed);
  const WeightedParameters wp = weighted_parameters(prior);
  if (cfg.geometry == GeometryKind::kWeightedEuclidean && !cfg.block_weights && wp.degenerate)
    throw ConfigError("prior has zero-probability classes; weighted norm is degenerate");
  GeometrySpec geometry = make_geometry(cfg, k, wp);

  std::optional<Vector> c;
  if (cfg.class_scale != ClassScaleMode::kNone) c = wp.c;

  TaskParams tp{k, cfg.d, cfg.x_bound, cfg.rho_star, prior, c};
  const std::uint64_t task_seed = derive_seed(seed, SeedTag::kTask);
  double rho = cfg.rho;
  if (cfg.margin_fraction) {
    tp.rho_star = *cfg.margin_fraction * margin_ceiling(tp, geometry, task_seed);
    if (!(tp.rho_star > 0.0)) throw ConfigError("task.margin_fraction: the construction has no positive margin");
    rho = tp.rho_star;
  }
  LossConfig loss(rho, c);
  Task task = make_task(tp, geometry, task_seed);

  BoundInputs inputs;
  inputs.omega = cfg.omega;
  inputs.x_bound = cfg.x_bound;
  inputs.rho = rho;
  inputs.k = k;
  inputs.n = cfg.n;

  BoundConstants constants;
  switch (cfg.geometry) {
    case GeometryKind::kEuclideanProduct:
      constants = euclid_constants(inputs);
      break;
    case GeometryKind::kBlockPower:
      constants = l1l2_constants(inputs);
      break;
    case GeometryKind::kWeightedEuclidean:
      constants = weighted_constants(inputs, prior);
      break;
  }
  Setup s{std::move(geometry), std::move(loss), std::move(prior), std::move(task), constants, inputs};
  if (cfg.geometry == GeometryKind::kWeightedEuclidean && cfg.block_weights)
    s.constants = {std::sqrt(capacity(s.geometry)), gradient_bound(s)};
  return s;
}

StepSchedule schedule_for(const Setup& setup, std::size_t n) {
  if (n == 0) return StepSchedule::custom({});
  return constant_step(setup.constants.U, setup.constants.G, n);
}

double rate_bound(const Setup& setup) {
  if (setup.inputs.n == 0) return kInf;
  switch (setup.geometry.kind()) {
    case GeometryKind::kEuclideanProduct:
      return rate_euclid(setup.inputs);
    case GeometryKind::kBlockPower:
      return rate_l1l2(setup.inputs);
    case GeometryKind::kWeightedEuclidean:
      return std::sqrt(2.0) * setup.constants.U * setup.constants.G / std::sqrt(static_cast<double>(setup.inputs.n));
  }
  return kInf;
}

double gradient_bound(const Setup& setup) {
  const Eigen::Index k = setup.geometry.classes();
  Vector c = Vector::Ones(k);
  if (setup.loss.class_scale()) c = *setup.loss.class_scale();
  const double scale = setup.inputs.x_bound / setup.loss.rho();
  switch (setup.geometry.kind()) {
    case GeometryKind::kEuclideanProduct:
      return scale * std::sqrt(top_two(c.array().square()));
    case GeometryKind::kBlockPower:
      return scale * c.maxCoeff();
    case GeometryKind::kWeightedEuclidean:
      return scale * std::sqrt(top_two(c.array().square() / setup.geometry.block_weights().array()));
  }
  return kInf;
}

double estimate_g_bar(const Setup& setup, std::uint64_t seed, std::size_t samples, std::size_t points) {
  std::mt19937_64 rng(derive_seed(seed, SeedTag::kGradient));
  std::vector<WeightMatrix> at{initial_point(setup.geometry), setup.task.anchor()};
  for (std::size_t i = 0; i < points; ++i) at.push_back(random_feasible(setup.geometry, rng));

  const std::uint64_t stream = derive_seed(seed, SeedTag::kGradient) ^ 0x5bd1e995ULL;
  double best = 0.0;
  for (const auto& w : at) {
    WeightMatrix mean = WeightMatrix::Zero(w.rows(), w.cols());
    for (std::size_t i = 0; i < samples; ++i) subgradient(setup.task.draw(stream, i), w, setup.loss).add_to(mean);
    mean /= static_cast<double>(samples);
    best = std::max(best, dual_norm(mean, setup.geometry));
  }
  return best;
}

ReplicateRow run_replicate(const ExperimentConfig& cfg, Eigen::Index k, std::size_t r) {
  const std::uint64_t seed = replicate_seed(cfg.base_seed, r);
  const Setup setup = make_setup(cfg, k, seed);
  const StepSchedule schedule = schedule_for(setup, cfg.n);

  RunOptions opts;
  opts.audit = cfg.audit;
  opts.seed = derive_seed(seed, SeedTag::kProbes);
  opts.comparator = setup.task.anchor();
  const std::uint64_t stream_seed = derive_seed(seed, SeedTag::kStream);
  const Task& task = setup.task;
  const RunRecord rec =
      run([&task, stream_seed](std::size_t m) { return task.draw(stream_seed, m); }, setup.geometry, schedule,
          setup.loss, opts);

  const RiskEstimate risk = estimate_risk(task, rec.final_average, setup.loss, cfg.n_mc, derive_seed(seed, SeedTag::kRisk));

  ReplicateRow row;
  row.k = k;
  row.n = cfg.n;
  row.geometry = cfg.geometry;
  row.replicate = r;
  row.seed = seed;
  // The anchor certifies F(w*) = 0.
  row.empirical_excess = risk.mean;
  row.std_error = risk.std_error;
  row.bound_eq2 = cfg.n == 0 ? kInf : oracle_bound(setup.constants.U, setup.constants.G, schedule);
  row.bound_rate = rate_bound(setup);
  row.audit_min_residual = cfg.audit ? rec.audit_min() : std::numeric_limits<double>::quiet_NaN();
  row.summed_slack = rec.summed_slack;
  return row;
}

RunReport cmd_run(const ExperimentConfig& cfg) {
  RunReport report;
  const auto rows = run_jobs<ReplicateRow>(
      cfg.replicates, cfg.workers, [&](std::size_t r) { return run_replicate(cfg, cfg.k, r); }, report.failure);
  report.rows = completed(rows);
  const Summary s = summarize(report.rows);
  report.mean_excess = s.mean;
  report.pooled_std_error = s.pooled_se;
  report.mean_bound_rate = s.mean_bound;
  report.audit_min_residual = s.audit_min;
  return report;
}

SlopeFit fit_log_slope(const std::vector<double>& ks, const std::vector<double>& values) {
  if (ks.size() != values.size() || ks.size() < 2) throw InvalidInput("fit_log_slope: need matching inputs, >= 2 points");
  const auto m = static_cast<double>(ks.size());
  double mx = 0.0;
  double my = 0.0;
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] > 0.0) || !(values[i] > 0.0)) throw InvalidInput("fit_log_slope: values must be positive");
    lx.push_back(std::log(ks[i]));
    ly.push_back(std::log(values[i]));
    mx += lx.back();
    my += ly.back();
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  if (lx.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double res = ly[i] - (my + fit.slope * (lx[i] - mx));
      rss += res * res;
    }
    fit.std_error = std::sqrt(rss / (m - 2.0) / sxx);
  }
  return fit;
}

SweepResult cmd_sweep_k(const ExperimentConfig& cfg, const std::vector<Eigen::Index>& k_grid) {
  if (k_grid.size() < 3) throw ConfigError("sweep-k: k_grid needs at least 3 points");
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (k_grid[i] < 2) throw ConfigError("sweep-k: k_grid entries must be at least 2");
    if (i > 0 && k_grid[i] <= k_grid[i - 1]) throw ConfigError("sweep-k: k_grid must be strictly increasing");
  }

  SweepResult result;
  const std::size_t reps = cfg.replicates;
  const auto rows = run_jobs<ReplicateRow>(
      k_grid.size() * reps, cfg.workers,
      [&](std::size_t job) { return run_replicate(cfg, k_grid[job / reps], job % reps); }, result.failure);
  result.rows = completed(rows);
  if (result.failure) return result;

  std::vector<double> ks;
  std::vector<double> means;
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    const std::vector<ReplicateRow> slice(result.rows.begin() + static_cast<std::ptrdiff_t>(i * reps),
                                          result.rows.begin() + static_cast<std::ptrdiff_t>((i + 1) * reps));
    const Summary s = summarize(slice);
    result.points.push_back({k_grid[i], s.mean, s.pooled_se, s.mean_bound});
    ks.push_back(static_cast<double>(k_grid[i]));
    means.push_back(s.mean);
  }
  result.fit = fit_log_slope(ks, means);
  return result;
}

double conservative_sigma2(double g_max) { return std::max(2.0 * g_max, 4.0 * g_max * g_max); }

namespace {

BoundReport bound_report_for(const ExperimentConfig& cfg, const Setup& setup, double g_bar, bool estimated,
                             double theta) {
  BoundReport rep;
  rep.geometry = cfg.geometry;
  rep.k = setup.geometry.classes();
  rep.n = cfg.n;
  rep.U = setup.constants.U;
  rep.G = setup.constants.G;
  rep.B = sqrt_prior_sum(setup.prior);
  rep.theta = theta;
  rep.sigma2 = conservative_sigma2(gradient_bound(setup));
  rep.g_bar = g_bar;
  rep.g_bar_estimated = estimated;
  rep.deviation_prob = deviation_probability(theta);
  if (cfg.n == 0) {
    rep.alpha = rep.eq2_bound = rep.constant_rate = rep.deviation_threshold = rep.weighted_rate = kInf;
    return rep;
  }
  const StepSchedule schedule = schedule_for(setup, cfg.n);
  rep.alpha = schedule.at(0);
  rep.eq2_bound = oracle_bound(rep.U, rep.G, schedule);
  rep.constant_rate = rate_bound(setup);
  rep.weighted_rate = rate_weighted(setup.inputs, setup.prior);
  BoundInputs inp = setup.inputs;
  inp.sigma2 = rep.sigma2;
  inp.theta = theta;
  inp.g_bar = g_bar;
  if (theta > 0.0) {
    rep.deviation_threshold = deviation_bound(inp, rep.U, schedule).threshold;
  } else {
    rep.deviation_threshold = (g_bar * g_bar * schedule.sum_squares() + rep.U * rep.U) / schedule.sum();
  }
  return rep;
}

}  // namespace

BoundReport cmd_bounds(const ExperimentConfig& cfg) {
  const Setup setup = make_setup(cfg, cfg.k, cfg.base_seed);
  const double g_bar = cfg.g_bar ? *cfg.g_bar : gradient_bound(setup);
  return bound_report_for(cfg, setup, g_bar, false, cfg.theta);
}

TailReport cmd_deviation(const ExperimentConfig& cfg, double theta) {
  TailReport out;
  const Setup setup = make_setup(cfg, cfg.k, replicate_seed(cfg.base_seed, 0));
  const bool estimated = !cfg.g_bar;
  const double g_bar = cfg.g_bar ? *cfg.g_bar : estimate_g_bar(setup, cfg.base_seed);
  out.bounds = bound_report_for(cfg, setup, g_bar, estimated, theta);

  const auto rows = run_jobs<ReplicateRow>(
      cfg.replicates, cfg.workers, [&](std::size_t r) { return run_replicate(cfg, cfg.k, r); }, out.failure);
  out.rows = completed(rows);
  for (const auto& r : out.rows) {
    if (r.empirical_excess > out.bounds.deviation_threshold) ++out.exceed_count;
  }
  const auto reps = static_cast<double>(std::max<std::size_t>(1, out.rows.size()));
  out.fraction = static_cast<double>(out.exceed_count) / reps;
  const double p = std::min(1.0, out.bounds.deviation_prob);
  out.binomial_band = 3.0 * std::sqrt(p * (1.0 - p) / reps);
  return out;
}

std::string format_csv(const std::vector<ReplicateRow>& rows, const std::optional<std::string>& failure) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.k << ',' << r.n << ',' << to_string(r.geometry) << ',' << r.replicate << ',' << r.seed << ','
       << num(r.empirical_excess) << ',' << num(r.std_error) << ',' << num(r.bound_eq2) << ',' << num(r.bound_rate)
       << ',' << num(r.audit_min_residual) << '\n';
  }
  if (failure) os << "# partial: " << *failure << '\n';
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

namespace {

using nlohmann::json;

json bound_json(const BoundReport& r) {
  return {{"geometry", std::string(to_string(r.geometry))},
          {"k", r.k},
          {"n", r.n},
          {"U", r.U},
          {"G", r.G},
          {"alpha", r.alpha},
          {"eq2_bound", r.eq2_bound},
          {"constant_rate", r.constant_rate},
          {"deviation_threshold", r.deviation_threshold},
          {"deviation_prob", r.deviation_prob},
          {"B", r.B},
          {"weighted_rate", r.weighted_rate},
          {"theta", r.theta},
          {"sigma2", r.sigma2},
          {"g_bar", r.g_bar},
          {"g_bar_estimated", r.g_bar_estimated}};
}

json config_json(const ExperimentConfig& c) {
  json j = {{"geometry", std::string(to_string(c.geometry))},
            {"omega", c.omega},
            {"k", c.k},
            {"d", c.d},
            {"x_bound", c.x_bound},
            {"rho_star", c.rho_star},
            {"margin_fraction", c.margin_fraction ? json(*c.margin_fraction) : json(nullptr)},
            {"prior", std::string(to_string(c.prior))},
            {"beta", c.beta},
            {"rho", c.rho},
            {"class_scale", std::string(to_string(c.class_scale))},
            {"epsilon", c.epsilon},
            {"n", c.n},
            {"replicates", c.replicates},
            {"base_seed", c.base_seed},
            {"n_mc", c.n_mc},
            {"audit", c.audit}};
  if (c.margin_fraction) {
    j.erase("rho_star");
    j.erase("rho");
  }
  if (c.block_weights) j["block_weights"] = *c.block_weights;
  return j;
}

json with_status(json j, const std::optional<std::string>& failure) {
  j["status"] = failure ? "numerical_failure" : "ok";
  if (failure) j["failure"] = *failure;
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string bound_report_json(const BoundReport& report) { return dump(bound_json(report)); }

std::string bound_report_text(const BoundReport& r) {
  std::ostringstream os;
  auto line = [&](const char* name, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %-20s %.10g\n", name, v);
    os << buf;
  };
  os << "bounds for " << to_string(r.geometry) << ", k = " << r.k << ", n = " << r.n << '\n';
  line("U", r.U);
  line("G", r.G);
  line("alpha", r.alpha);
  line("eq2_bound", r.eq2_bound);
  line("constant_rate", r.constant_rate);
  line("deviation_threshold", r.deviation_threshold);
  line("deviation_prob", r.deviation_prob);
  line("B", r.B);
  line("weighted_rate", r.weighted_rate);
  line("theta", r.theta);
  line("sigma2", r.sigma2);
  line("g_bar", r.g_bar);
  return os.str();
}

std::string run_report_json(const ExperimentConfig& cfg, const BoundReport& bounds, const RunReport& report) {
  json j = {{"command", "run"},
            {"config", config_json(cfg)},
            {"bounds", bound_json(bounds)},
            {"summary",
             {{"replicates", report.rows.size()},
              {"mean_excess", report.mean_excess},
              {"pooled_std_error", report.pooled_std_error},
              {"mean_bound_rate", report.mean_bound_rate},
              {"audit_min_residual", report.audit_min_residual}}}};
  return dump(with_status(std::move(j), report.failure));
}

std::string sweep_report_json(const ExperimentConfig& cfg, const SweepResult& result) {
  json points = json::array();
  for (const auto& p : result.points)
    points.push_back({{"k", p.k},
                      {"mean_excess", p.mean_excess},
                      {"pooled_std_error", p.pooled_std_error},
                      {"bound_rate", p.bound_rate}});
  json j = {{"command", "sweep-k"},
            {"config", config_json(cfg)},
            {"points", points},
            {"slope", result.fit.slope},
            {"slope_std_error", result.fit.std_error}};
  return dump(with_status(std::move(j), result.failure));
}

std::string tail_report_json(const ExperimentConfig& cfg, const TailReport& report) {
  json j = {{"command", "deviation"},
            {"config", config_json(cfg)},
            {"bounds", bound_json(report.bounds)},
            {"tail",
             {{"replicates", report.rows.size()},
              {"exceed_count", report.exceed_count},
              {"fraction", report.fraction},
              {"prob_bound", report.bounds.deviation_prob},
              {"binomial_band", report.binomial_band}}}};
  return dump(with_status(std::move(j), report.failure));
}

}  // namespace msmd
