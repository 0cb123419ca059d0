#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voterlab/dynamics.hpp"
#include "voterlab/graph.hpp"
#include "voterlab/provider.hpp"

namespace voterlab {

struct GraphParams {
  std::string family = "cycle";  // cycle complete star path petersen circulant random-regular
                                 // subdivided-expander cut-graph edge-list
  std::size_t n = 16;
  std::size_t d = 3;
  std::size_t k = 2;          // circulant offset range
  std::size_t ell = 2;        // subdivided-expander path length
  std::size_t n_prime = 0;    // cut-graph side / subdivided-expander base size
  double phi = 0.1;           // cut-graph target
  std::uint64_t seed = 1;     // generator seed
  std::string file;           // edge-list path
};

struct ExperimentConfig {
  GraphParams graph;
  std::string model = "standard";          // standard | biased
  std::vector<double> alphas{1.0, 0.5};    // biased only
  std::string provider = "static";         // static | schedule | cut-adversary | degree-adversary
  std::optional<double> phi;               // static phi; empty = computed
  std::vector<double> phi_schedule;        // schedule / cut-adversary; cycled
  std::size_t provider_n_prime = 0;        // schedule provider side size; 0 = n/2
  double gamma = 0.125;
  std::string initial = "distinct";        // distinct | split | k-random | explicit
  std::size_t kappa = 2;
  std::size_t initial_k = 1;               // k-random: nodes holding opinion 0
  std::vector<Opinion> assignment;         // explicit
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::size_t max_rounds = 1'000'000;
  bool monitor_good_sequence = false;
  bool monitor_balance = true;
  bool checkpoints = true;                 // per-round trace rows
  double beta = 8.0;
  std::string out_dir = "out";
  std::vector<std::size_t> scaling_sizes;  // scaling subcommand
};

// Parses YAML text. Unknown keys, wrong types and bad values throw
// ConfigInvalid with "line L: field: reason".
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Every field, defaults included.
nlohmann::json resolved_config_json(const ExperimentConfig& c);

// "cycle:8", "random-regular:1000:3[:seed]", "complete:5", "petersen", ...
GraphParams parse_family_string(const std::string& text);

Graph build_graph_from_params(const GraphParams& params);
std::vector<Opinion> build_initial_assignment(const ExperimentConfig& c, const Graph& g, Rng& rng);
std::unique_ptr<GraphProvider> build_provider(const ExperimentConfig& c, std::shared_ptr<const Graph> g);
RunOptions build_run_options(const ExperimentConfig& c);

}  // namespace voterlab
