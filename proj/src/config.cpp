#include "msmd/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace msmd {

namespace pt = boost::property_tree;

std::string_view to_string(PriorKind kind) { return kind == PriorKind::kUniform ? "uniform" : "power-law"; }

std::string_view to_string(ClassScaleMode mode) {
  switch (mode) {
    case ClassScaleMode::kNone:
      return "none";
    case ClassScaleMode::kWeighted:
      return "weighted";
    case ClassScaleMode::kWeightedEstimated:
      return "weighted-estimated";
  }
  return "none";
}

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"geometry", {"kind", "omega", "block_weights"}},
      {"task", {"k", "d", "x_bound", "rho_star", "margin_fraction", "prior", "beta"}},
      {"loss", {"rho", "class_scale", "epsilon"}},
      {"run", {"n", "replicates", "base_seed", "n_mc", "audit", "workers"}},
      {"sweep", {"k_grid"}},
      {"deviation", {"theta", "g_bar"}},
  };
  return s;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& field, const std::string& value, const std::string& expected) {
  throw ConfigError("field '" + field + "': expected " + expected + ", got '" + value + "'");
}

double to_double(const std::string& field, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(field, v, "a real number");
  return out;
}

std::uint64_t to_uint(const std::string& field, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(field, v, "a nonnegative integer");
  return out;
}

bool to_bool(const std::string& field, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(field, v, "true or false");
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& field, const std::string& raw, F convert) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<T>(convert(field, item)));
  if (out.empty()) bad_value(field, raw, "a comma-separated list");
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(omega > 0.0, "field 'geometry.omega': must be positive");
  require(k >= 2, "field 'task.k': must be at least 2");
  require(d >= 1, "field 'task.d': must be at least 1");
  require(x_bound > 0.0, "field 'task.x_bound': must be positive");
  require(rho_star > 0.0, "field 'task.rho_star': must be positive");
  require(beta >= 0.0, "field 'task.beta': must be nonnegative");
  require(rho > 0.0, "field 'loss.rho': must be positive");
  if (margin_fraction)
    require(*margin_fraction > 0.0 && *margin_fraction < 1.0, "field 'task.margin_fraction': must lie in (0, 1)");
  else
    require(rho <= rho_star, "field 'loss.rho': must not exceed task.rho_star (zero-risk certificate)");
  require(epsilon >= 0.0, "field 'loss.epsilon': must be nonnegative");
  require(replicates >= 1, "field 'run.replicates': must be at least 1");
  require(n_mc >= 1, "field 'run.n_mc': must be at least 1");
  require(workers >= 1, "field 'run.workers': must be at least 1");
  require(theta >= 0.0, "field 'deviation.theta': must be nonnegative");
  if (block_weights) {
    require(geometry == GeometryKind::kWeightedEuclidean,
            "field 'geometry.block_weights': only valid for weighted-euclidean");
    require(static_cast<Eigen::Index>(block_weights->size()) == k, "field 'geometry.block_weights': needs k entries");
    for (double b : *block_weights) require(b > 0.0, "field 'geometry.block_weights': entries must be positive");
  }
  if (class_scale != ClassScaleMode::kNone)
    require(geometry == GeometryKind::kWeightedEuclidean,
            "field 'loss.class_scale': weighted scorers need geometry.kind = weighted-euclidean");
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    require(k_grid[i] >= 2, "field 'sweep.k_grid': entries must be at least 2");
    if (i > 0) require(k_grid[i] > k_grid[i - 1], "field 'sweep.k_grid': must be strictly increasing");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      if (body.empty()) throw ConfigError("key '" + section + "' outside of any section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, _] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown key '" + section + "." + key + "'");
    }
  }

  ExperimentConfig cfg;
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    const auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  };

  if (auto v = get("geometry.kind")) {
    try {
      cfg.geometry = parse_geometry_kind(*v);
    } catch (const InvalidInput&) {
      bad_value("geometry.kind", *v, "euclidean-product, block-power or weighted-euclidean");
    }
  }
  if (auto v = get("geometry.omega")) cfg.omega = to_double("geometry.omega", *v);
  if (auto v = get("geometry.block_weights"); v && *v != "auto")
    cfg.block_weights = to_list<double>("geometry.block_weights", *v, to_double);

  if (auto v = get("task.k")) cfg.k = static_cast<Eigen::Index>(to_uint("task.k", *v));
  if (auto v = get("task.d")) cfg.d = static_cast<Eigen::Index>(to_uint("task.d", *v));
  if (auto v = get("task.x_bound")) cfg.x_bound = to_double("task.x_bound", *v);
  if (auto v = get("task.rho_star")) cfg.rho_star = to_double("task.rho_star", *v);
  if (auto v = get("task.margin_fraction")) {
    if (get("task.rho_star") || get("loss.rho"))
      throw ConfigError("field 'task.margin_fraction': cannot be combined with task.rho_star or loss.rho");
    cfg.margin_fraction = to_double("task.margin_fraction", *v);
  }
  if (auto v = get("task.prior")) {
    if (*v == "uniform")
      cfg.prior = PriorKind::kUniform;
    else if (*v == "power-law")
      cfg.prior = PriorKind::kPowerLaw;
    else
      bad_value("task.prior", *v, "uniform or power-law");
  }
  if (auto v = get("task.beta")) cfg.beta = to_double("task.beta", *v);

  if (auto v = get("loss.rho")) cfg.rho = to_double("loss.rho", *v);
  if (auto v = get("loss.class_scale")) {
    if (*v == "none")
      cfg.class_scale = ClassScaleMode::kNone;
    else if (*v == "weighted")
      cfg.class_scale = ClassScaleMode::kWeighted;
    else if (*v == "weighted-estimated")
      cfg.class_scale = ClassScaleMode::kWeightedEstimated;
    else
      bad_value("loss.class_scale", *v, "none, weighted or weighted-estimated");
  }
  if (auto v = get("loss.epsilon")) cfg.epsilon = to_double("loss.epsilon", *v);

  if (auto v = get("run.n")) cfg.n = to_uint("run.n", *v);
  if (auto v = get("run.replicates")) cfg.replicates = to_uint("run.replicates", *v);
  if (auto v = get("run.base_seed")) cfg.base_seed = to_uint("run.base_seed", *v);
  if (auto v = get("run.n_mc")) cfg.n_mc = to_uint("run.n_mc", *v);
  if (auto v = get("run.audit")) cfg.audit = to_bool("run.audit", *v);
  if (auto v = get("run.workers")) cfg.workers = to_uint("run.workers", *v);

  if (auto v = get("sweep.k_grid"))
    for (auto k : to_list<std::uint64_t>("sweep.k_grid", *v, to_uint)) cfg.k_grid.push_back(static_cast<Eigen::Index>(k));

  if (auto v = get("deviation.theta")) cfg.theta = to_double("deviation.theta", *v);
  if (auto v = get("deviation.g_bar")) cfg.g_bar = to_double("deviation.g_bar", *v);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace msmd
