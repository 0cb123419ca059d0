#include <doctest.h>

#include <algorithm>

#include "voterlab/config.hpp"
#include "voterlab/errors.hpp"

using namespace voterlab;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigInvalid);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty config resolves to defaults") {
  const auto c = parse_config("");
  CHECK(c.graph.family == "cycle");
  CHECK(c.model == "standard");
  CHECK(c.trials == 1);
  const auto j = resolved_config_json(c);
  for (const char* key : {"graph", "model", "provider", "initial", "trials", "seed", "max_rounds", "monitors", "output"}) {
    CHECK(j.contains(key));
  }
}

TEST_CASE("full config parses every section") {
  const auto c = parse_config(R"(
graph:
  family: random-regular
  n: 64
  d: 6
  seed: 3
model:
  type: biased
  alphas: [1.0, 0.25]
provider:
  type: static
  phi: 0.2
initial:
  rule: k-random
  kappa: 2
  k: 10
trials: 5
seed: 42
max_rounds: 500
monitors:
  good_sequence: true
  beta: 4
output:
  dir: results
)");
  CHECK(c.graph.family == "random-regular");
  CHECK(c.graph.d == 6);
  CHECK(c.alphas == std::vector<double>{1.0, 0.25});
  REQUIRE(c.phi);
  CHECK(*c.phi == 0.2);
  CHECK(c.initial_k == 10);
  CHECK(c.seed == 42);
  CHECK(c.max_rounds == 500);
  CHECK(c.monitor_good_sequence);
  CHECK(c.beta == 4.0);
  CHECK(c.out_dir == "results");
  const auto o = build_run_options(c);
  CHECK(o.model == Model::Biased);
  CHECK(o.record_steps);
}

TEST_CASE("unknown keys are rejected with their line") {
  const auto msg = config_error("graph:\n  family: cycle\n  size: 8\n");
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("graph.size") != std::string::npos);
  CHECK(config_error("colour: blue\n").find("line 1: colour: unknown key") != std::string::npos);
}

TEST_CASE("type and value errors carry line and field") {
  CHECK(config_error("trials: many\n").find("line 1: trials: cannot parse") != std::string::npos);
  CHECK(config_error("graph:\n  n: -4\n").find("line 2: graph.n") != std::string::npos);
  CHECK(config_error("graph:\n  family: torus\n").find("not one of") != std::string::npos);
  CHECK(config_error("provider:\n  phi: 2\n").find("provider.phi") != std::string::npos);
  CHECK(config_error("model:\n  alphas: [0.5, 1]\n").find("alpha_0") != std::string::npos);
  CHECK(config_error("graph: [1\n").find("syntax error") != std::string::npos);
  CHECK(config_error("model:\n  type: biased\n").find("initial.rule") != std::string::npos);
}

TEST_CASE("family strings") {
  CHECK(build_graph_from_params(parse_family_string("cycle:8")).node_count() == 8);
  const auto rr = parse_family_string("random-regular:20:3:9");
  CHECK(rr.n == 20);
  CHECK(rr.d == 3);
  CHECK(rr.seed == 9);
  CHECK(build_graph_from_params(parse_family_string("petersen")).edge_count() == 15);
  CHECK_THROWS_AS(parse_family_string("cycle"), Error);
  CHECK_THROWS_AS(parse_family_string("blob:3"), Error);
  CHECK_THROWS_AS(parse_family_string("cycle:x"), Error);
}

TEST_CASE("initial assignment rules") {
  const Graph g = build_graph_from_params(parse_family_string("cycle:10"));
  Rng rng(5);
  ExperimentConfig c;
  c.initial = "distinct";
  auto a = build_initial_assignment(c, g, rng);
  std::sort(a.begin(), a.end());
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());

  c.initial = "split";
  c.kappa = 2;
  a = build_initial_assignment(c, g, rng);
  CHECK(std::count(a.begin(), a.end(), 0U) == 5);

  c.initial = "k-random";
  c.initial_k = 3;
  a = build_initial_assignment(c, g, rng);
  CHECK(std::count(a.begin(), a.end(), 0U) == 3);

  c.initial = "explicit";
  c.assignment = {0, 1};
  CHECK_THROWS_AS(build_initial_assignment(c, g, rng), Error);
}
