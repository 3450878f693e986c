#include <doctest.h>

#include <string>

#include "msmd/config.hpp"

using namespace msmd;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("full config parses") {
  const auto cfg = parse_config(R"(
# comment
[geometry]
kind = block-power
omega = 0.5

[task]
k = 12
d = 7
x_bound = 2
rho_star = 0.25
prior = power-law
beta = 3

[loss]
rho = 0.2

[run]
n = 300
replicates = 4
base_seed = 9
n_mc = 1000
audit = true
workers = 2

[sweep]
k_grid = 4, 16, 64

[deviation]
theta = 2.5
g_bar = 0.3
)");
  CHECK(cfg.geometry == GeometryKind::kBlockPower);
  CHECK(cfg.omega == 0.5);
  CHECK(cfg.k == 12);
  CHECK(cfg.d == 7);
  CHECK(cfg.x_bound == 2.0);
  CHECK(cfg.rho_star == 0.25);
  CHECK(cfg.prior == PriorKind::kPowerLaw);
  CHECK(cfg.rho == 0.2);
  CHECK(cfg.n == 300);
  CHECK(cfg.replicates == 4);
  CHECK(cfg.base_seed == 9);
  CHECK(cfg.audit);
  CHECK(cfg.workers == 2);
  CHECK(cfg.k_grid == std::vector<Eigen::Index>{4, 16, 64});
  CHECK(cfg.theta == 2.5);
  CHECK(cfg.g_bar == 0.3);
  CHECK_FALSE(cfg.margin_fraction);
}

TEST_CASE("defaults") {
  const auto cfg = parse_config("");
  CHECK(cfg.geometry == GeometryKind::kEuclideanProduct);
  CHECK(cfg.replicates == 1);
  CHECK(cfg.k_grid.empty());
}

TEST_CASE("weighted options") {
  const auto cfg = parse_config(
      "[geometry]\nkind = weighted-euclidean\nblock_weights = 1, 0.5, 0.25\n[task]\nk = 3\n[loss]\nclass_scale = "
      "weighted-estimated\nepsilon = 0.2\n");
  CHECK(cfg.block_weights == std::vector<double>{1.0, 0.5, 0.25});
  CHECK(cfg.class_scale == ClassScaleMode::kWeightedEstimated);
  CHECK(cfg.epsilon == 0.2);
  CHECK_FALSE(parse_config("[geometry]\nkind = weighted-euclidean\nblock_weights = auto\n").block_weights);
}

TEST_CASE("unknown keys and sections fail closed") {
  CHECK(message_of("[task]\nkk = 3\n").find("unknown key 'task.kk'") != std::string::npos);
  CHECK(message_of("[tasks]\nk = 3\n").find("unknown section [tasks]") != std::string::npos);
  CHECK(message_of("k = 3\n").find("outside of any section") != std::string::npos);
}

TEST_CASE("diagnostics name the field or line") {
  CHECK(message_of("[task]\nk = three\n").find("field 'task.k'") != std::string::npos);
  CHECK(message_of("[geometry]\nkind = hyperbolic\n").find("field 'geometry.kind'") != std::string::npos);
  CHECK(message_of("[run]\naudit = maybe\n").find("field 'run.audit'") != std::string::npos);
  CHECK(message_of("[task]\nk = 3\n[task\n").find("line 3") != std::string::npos);
  CHECK(message_of("[run]\nn = 1\nn = 2\n").find("line") != std::string::npos);
}

TEST_CASE("validation") {
  CHECK(message_of("[task]\nk = 1\n").find("task.k") != std::string::npos);
  CHECK(message_of("[geometry]\nomega = -1\n").find("geometry.omega") != std::string::npos);
  CHECK(message_of("[task]\nrho_star = 0.5\n[loss]\nrho = 0.6\n").find("loss.rho") != std::string::npos);
  CHECK(message_of("[run]\nreplicates = 0\n").find("run.replicates") != std::string::npos);
  CHECK(message_of("[sweep]\nk_grid = 4, 4, 8\n").find("strictly increasing") != std::string::npos);
  CHECK(message_of("[sweep]\nk_grid = 1, 4, 8\n").find("k_grid") != std::string::npos);
  CHECK(message_of("[geometry]\nblock_weights = 1, 1\n").find("block_weights") != std::string::npos);
  CHECK(message_of("[loss]\nclass_scale = weighted\n").find("class_scale") != std::string::npos);
}

TEST_CASE("margin fraction") {
  CHECK(parse_config("[task]\nmargin_fraction = 0.9\n").margin_fraction == 0.9);
  CHECK(message_of("[task]\nmargin_fraction = 1\n").find("(0, 1)") != std::string::npos);
  CHECK(message_of("[task]\nmargin_fraction = 0.5\nrho_star = 1\n").find("cannot be combined") != std::string::npos);
  CHECK(message_of("[task]\nmargin_fraction = 0.5\n[loss]\nrho = 1\n").find("cannot be combined") !=
        std::string::npos);
}

TEST_CASE("missing file") { CHECK_THROWS_AS(load_config("/nonexistent/cfg.ini"), ConfigError); }
