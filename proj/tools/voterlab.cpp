// voterlab command-line runner.
// Exit codes: 0 success, 1 invalid input / failed verification, 2 max rounds exceeded.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "voterlab/adversary.hpp"
#include "voterlab/conductance.hpp"
#include "voterlab/config.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/oracle.hpp"
#include "voterlab/stats.hpp"
#include "voterlab/step_schedule.hpp"
#include "voterlab/suites.hpp"
#include "voterlab/version.hpp"

namespace fs = std::filesystem;
using namespace voterlab;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::size_t threads = 0;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, Common& c, bool with_config = true) {
  if (with_config) cmd->add_option("--config", c.config, "YAML experiment config");
  cmd->add_option("--seed", c.seed, "base seed (overrides VOTERLAB_SEED and the config)");
  cmd->add_option("--trials", c.trials, "number of trials");
  cmd->add_option("--threads", c.threads, "worker threads (0 = hardware)");
  cmd->add_option("--out-dir", c.out_dir, "output directory");
}

// Seed precedence: --seed, then VOTERLAB_SEED, then the config value.
std::uint64_t resolve_seed(const Common& c, std::uint64_t config_seed) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("VOTERLAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigInvalid, std::string("VOTERLAB_SEED: cannot parse '") + env + "'");
    }
  }
  return config_seed;
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  cfg.seed = resolve_seed(c, cfg.seed);
  if (c.trials) {
    if (*c.trials == 0) throw Error(ErrorCode::ConfigInvalid, "--trials: must be positive");
    cfg.trials = *c.trials;
  }
  if (c.out_dir) cfg.out_dir = *c.out_dir;
  return cfg;
}

nlohmann::json envelope(const ExperimentConfig& cfg) {
  return {{"version", kVersion}, {"seed", cfg.seed}, {"config", resolved_config_json(cfg)}};
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream(path) << j.dump(2) << '\n';
}

struct TrialOutcome {
  std::optional<std::size_t> t;
  std::optional<Opinion> winner;
  bool exceeded = false;
};

// Runs cfg.trials trials on g; trial i uses trial_rng(seed, i) for both the
// initial assignment and the dynamics. `first` receives trial 0's full trace.
std::vector<TrialOutcome> run_experiment(const ExperimentConfig& cfg, const std::shared_ptr<const Graph>& g,
                                         std::size_t threads, TraceRecord* first) {
  const RunOptions opt = build_run_options(cfg);
  std::vector<TrialOutcome> out(cfg.trials);
  collect_trials(
      cfg.trials, cfg.seed, threads,
      [&](std::size_t i, Rng& rng) {
        auto assignment = build_initial_assignment(cfg, *g, rng);
        const std::size_t kappa = cfg.initial == "distinct" ? g->node_count() : cfg.kappa;
        auto provider = build_provider(cfg, g);
        std::shared_ptr<const Graph> start = g;
        if (cfg.provider == "degree-adversary") {
          start = std::make_shared<const Graph>(DegreeChangingAdversary::build(assignment));
        }
        RunOptions o = opt;
        o.record_rows = opt.record_rows && i == 0;
        auto trace = run_until_consensus(*provider, OpinionState(*start, std::move(assignment), kappa), o, rng);
        out[i] = {trace.consensus_time, trace.winner, trace.max_rounds_exceeded};
        if (i == 0 && first) *first = std::move(trace);
        return 0.0;
      },
      1);
  return out;
}

nlohmann::json outcome_stats(const std::vector<TrialOutcome>& outs, std::uint64_t seed) {
  std::vector<double> times;
  std::size_t exceeded = 0;
  std::map<Opinion, std::size_t> wins;
  for (const auto& o : outs) {
    if (o.t) times.push_back(static_cast<double>(*o.t));
    exceeded += o.exceeded;
    if (o.winner) ++wins[*o.winner];
  }
  nlohmann::json j{{"trials", outs.size()}, {"max_rounds_exceeded", exceeded}};
  nlohmann::json w;
  for (const auto& [op, k] : wins) w[std::to_string(op)] = k;
  j["winners"] = w;
  if (!times.empty()) {
    const auto e = estimate(times, 0.99, seed);
    j["T"] = {{"mean", e.mean},
              {"median", e.median},
              {"variance", e.variance},
              {"mean_ci99", {e.mean_ci.lo, e.mean_ci.hi}},
              {"median_ci99", {e.median_ci.lo, e.median_ci.hi}}};
  }
  return j;
}

int cmd_simulate(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const auto g = std::make_shared<const Graph>(build_graph_from_params(cfg.graph));
  TraceRecord first;
  const auto outs = run_experiment(cfg, g, c.threads, &first);

  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "trace.csv");
    csv << "# " << kVersion << " seed=" << cfg.seed << " config=" << resolved_config_json(cfg).dump() << '\n';
    write_trace_csv(csv, first, cfg.initial == "distinct" ? g->node_count() : cfg.kappa);
  }
  {
    std::ofstream csv(dir / "trials.csv");
    csv << "# " << kVersion << " seed=" << cfg.seed << '\n' << "trial,T,winner,max_rounds_exceeded\n";
    for (std::size_t i = 0; i < outs.size(); ++i) {
      csv << i << ',' << (outs[i].t ? std::to_string(*outs[i].t) : "") << ','
          << (outs[i].winner ? std::to_string(*outs[i].winner) : "") << ',' << (outs[i].exceeded ? 1 : 0) << '\n';
    }
  }
  nlohmann::json summary = envelope(cfg);
  summary["graph"] = {{"n", g->node_count()}, {"m", g->edge_count()}, {"regular", g->is_regular()}};
  summary["first_trial"] = nlohmann::json::parse(trace_summary_json(first, cfg.seed));
  summary["first_trial"]["phi_sum"] = first.phi_sum;
  summary["first_trial"]["winner"] = first.winner ? nlohmann::json(*first.winner) : nlohmann::json(nullptr);
  summary["trials"] = outcome_stats(outs, cfg.seed);
  if (cfg.monitor_good_sequence && first.consensus_time) {
    try {
      const auto rep = monitor_good_sequence(
          first.steps, BiasConfig(cfg.alphas),
          {g->node_count(), static_cast<std::uint32_t>(g->max_degree()), cfg.beta, {}, {}});
      summary["good_sequence"] = {{"a_holds", rep.a_holds},
                                  {"violations_b", rep.violations_b},
                                  {"violations_c", rep.violations_c},
                                  {"violations_d", rep.violations_d},
                                  {"horizon", rep.horizon},
                                  {"T_prime", rep.T_prime}};
    } catch (const Error& e) {
      summary["good_sequence"] = {{"error", e.what()}};
    }
  }
  write_json(dir / "summary.json", summary);

  const bool exceeded = std::any_of(outs.begin(), outs.end(), [](const TrialOutcome& o) { return o.exceeded; });
  std::cout << "wrote " << (dir / "summary.json").string() << '\n';
  if (exceeded) {
    std::cerr << "MaxRoundsExceeded: some trials hit max_rounds=" << cfg.max_rounds << '\n';
    return 2;
  }
  return 0;
}

int cmd_verify(const Common& c, const std::string& suite, double scale) {
  SuiteOptions opts;
  opts.seed = resolve_seed(c, opts.seed);
  opts.threads = c.threads;
  opts.scale = scale;
  const auto res = run_suite(suite, opts);
  nlohmann::json j{{"version", kVersion}, {"seed", opts.seed}, {"scale", opts.scale}, {"threads", opts.threads}};
  j["result"] = res.to_json();
  const fs::path path = fs::path(c.out_dir.value_or("out")) / ("verify_" + suite + ".json");
  write_json(path, j);
  for (const auto& v : res.verdicts) std::cout << (v.pass ? "PASS " : "FAIL ") << v.claim << '\n';
  std::cout << suite << ": " << (res.pass() ? "PASS" : "FAIL") << " (" << path.string() << ")\n";
  return res.pass() ? 0 : 1;
}

int cmd_conductance(const Common& c, const std::string& family, const std::string& graph_file) {
  Graph g;
  if (!graph_file.empty()) {
    std::ifstream in(graph_file);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open graph file '" + graph_file + "'");
    g = read_edge_list(in, true);
  } else if (!family.empty()) {
    g = build_graph_from_params(parse_family_string(family));
  } else if (!c.config.empty()) {
    g = build_graph_from_params(load_config(c.config).graph);
  } else {
    throw Error(ErrorCode::ConfigInvalid, "conductance: give a family string, --graph or --config");
  }
  const auto r = conductance(g);
  if (r.mode == ConductanceMode::Exact) {
    std::cout << "exact " << r.value << '\n';
  } else {
    std::cerr << "warning: n=" << g.node_count() << " too large for exact conductance, using Cheeger bounds\n";
    std::cout << "cheeger [" << r.lower << ", " << r.upper << "]\n";
  }
  return 0;
}

int cmd_oracle(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const Graph g = build_graph_from_params(cfg.graph);
  Rng rng = trial_rng(cfg.seed, 0);
  const auto assignment = build_initial_assignment(cfg, g, rng);
  const OpinionState s(g, assignment, cfg.initial == "distinct" ? g.node_count() : cfg.kappa);
  nlohmann::json j = envelope(cfg);
  j["assignment"] = assignment;
  const auto time = exact_expected_consensus_time(g, s);
  j["expected_consensus_time"] = {{"value", time.expected_absorption_time},
                                  {"exact", time.rational ? nlohmann::json(time.time_exact) : nlohmann::json(nullptr)},
                                  {"states", time.state_space_size},
                                  {"residual", time.residual}};
  if (s.kappa() == 2) {
    const auto fix = exact_fixation_probability(g, s);
    j["fixation_opinion0"] = {{"value", fix.absorption_probabilities.at(0)},
                              {"exact", fix.rational ? nlohmann::json(fix.probability_exact) : nlohmann::json(nullptr)},
                              {"states", fix.state_space_size}};
    if (!s.is_consensus()) {
      const auto step = exact_one_step_distribution(g, s);
      j["one_step"] = {{"psi", step.psi}, {"expected_psi_next", step.expected_psi_next},
                       {"expected_volume", step.expected_volume}};
    }
  }
  write_json(fs::path(cfg.out_dir) / "oracle.json", j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_scaling(const Common& c, std::vector<std::size_t> sizes) {
  ExperimentConfig cfg = resolve(c);
  if (sizes.empty()) sizes = cfg.scaling_sizes;
  if (sizes.empty()) throw Error(ErrorCode::ConfigInvalid, "scaling: no sizes (use --sizes or scaling.sizes)");
  cfg.checkpoints = false;
  std::vector<double> ns, medians;
  nlohmann::json rows = nlohmann::json::array();
  bool exceeded = false;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  std::ofstream csv(dir / "scaling.csv");
  csv << "# " << kVersion << " seed=" << cfg.seed << '\n' << "n,trials,median,mean,max_rounds_exceeded\n";
  for (std::size_t n : sizes) {
    ExperimentConfig run = cfg;
    run.graph.n = n;
    const auto g = std::make_shared<const Graph>(build_graph_from_params(run.graph));
    if (!cfg.phi && cfg.provider == "static" && cfg.graph.family == "cycle") run.phi = 2.0 / static_cast<double>(n);
    const auto outs = run_experiment(run, g, c.threads, nullptr);
    const auto st = outcome_stats(outs, cfg.seed);
    const std::size_t over = st["max_rounds_exceeded"];
    exceeded = exceeded || over > 0;
    if (!st.contains("T")) throw Error(ErrorCode::InvariantViolation, "scaling: no trial reached consensus");
    const double med = st["T"]["median"], mean = st["T"]["mean"];
    ns.push_back(static_cast<double>(n));
    medians.push_back(med);
    rows.push_back({{"n", n}, {"stats", st}});
    csv << n << ',' << outs.size() << ',' << med << ',' << mean << ',' << over << '\n';
  }
  nlohmann::json j = envelope(cfg);
  j["sizes"] = rows;
  const auto fit = fit_scaling(ns, medians);
  j["fit"] = {{"exponent", fit.exponent}, {"intercept", fit.intercept}, {"stderr", fit.stderr_exponent},
              {"r2", fit.r_squared}};
  write_json(dir / "scaling.json", j);
  std::cout << "exponent " << fit.exponent << " +- " << fit.stderr_exponent << '\n';
  return exceeded ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voterlab: voter-model experiments and verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common common;
  auto* sim = app.add_subcommand("simulate", "run trials from a config; writes trace.csv, trials.csv, summary.json");
  add_common(sim, common);

  std::string suite;
  double scale = 1.0;
  auto* ver = app.add_subcommand("verify", "run a verification suite; exit 0 iff all checks pass");
  ver->add_option("suite", suite, "suite id")->required();
  ver->add_option("--scale", scale, "multiplier on the suite's sample counts");
  add_common(ver, common, false);

  std::string family, graph_file;
  auto* cond = app.add_subcommand("conductance", "exact conductance or Cheeger interval");
  cond->add_option("family", family, "family string, e.g. cycle:8 or random-regular:1000:3");
  cond->add_option("--graph", graph_file, "edge-list file");
  add_common(cond, common);

  auto* orc = app.add_subcommand("oracle", "exact fixation probability and expected consensus time");
  add_common(orc, common);

  std::vector<std::size_t> sizes;
  auto* sca = app.add_subcommand("scaling", "median consensus time over sizes and log-log fit");
  sca->add_option("--sizes", sizes, "graph sizes")->delimiter(',');
  add_common(sca, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*sim) return cmd_simulate(common);
    if (*ver) return cmd_verify(common, suite, scale);
    if (*cond) return cmd_conductance(common, family, graph_file);
    if (*orc) return cmd_oracle(common);
    if (*sca) return cmd_scaling(common, sizes);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
