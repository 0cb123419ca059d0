#include "voterlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "voterlab/adversary.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/generators.hpp"

namespace voterlab {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& why) {
  const auto mark = node.Mark();
  std::string where = mark.is_null() ? "" : "line " + std::to_string(mark.line + 1) + ": ";
  throw Error(ErrorCode::ConfigInvalid, where + field + ": " + why);
}

void require_map(const YAML::Node& node, const std::string& field) {
  if (!node.IsMap()) fail(node, field, "expected a mapping");
}

void reject_unknown(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) {
      fail(kv.first, section.empty() ? key : section + "." + key, "unknown key");
    }
  }
}

template <class T>
void read(const YAML::Node& parent, const std::string& key, const std::string& field, T& out) {
  const auto node = parent[key];
  if (!node) return;
  if (!node.IsScalar()) fail(node, field, "expected a scalar");
  try {
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (node.Scalar().starts_with('-')) fail(node, field, "must be non-negative");
    }
    out = node.as<T>();
  } catch (const YAML::BadConversion&) {
    fail(node, field, "cannot parse '" + node.Scalar() + "'");
  }
}

template <class T>
void read_list(const YAML::Node& parent, const std::string& key, const std::string& field, std::vector<T>& out) {
  const auto node = parent[key];
  if (!node) return;
  if (!node.IsSequence()) fail(node, field, "expected a list");
  out.clear();
  for (const auto& item : node) {
    try {
      out.push_back(item.as<T>());
    } catch (const YAML::BadConversion&) {
      fail(item, field, "cannot parse list element");
    }
  }
}

void one_of(const YAML::Node& node, const std::string& field, const std::string& value,
            std::initializer_list<const char*> options) {
  for (const char* o : options) {
    if (value == o) return;
  }
  std::string list;
  for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
  fail(node, field, "'" + value + "' is not one of {" + list + "}");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::ConfigInvalid,
                "line " + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg);
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  require_map(root, "<root>");
  reject_unknown(root, "", {"graph", "model", "provider", "initial", "trials", "seed", "max_rounds", "monitors",
                            "output", "scaling"});

  if (const auto g = root["graph"]) {
    require_map(g, "graph");
    reject_unknown(g, "graph", {"family", "n", "d", "k", "ell", "n_prime", "phi", "seed", "file"});
    read(g, "family", "graph.family", c.graph.family);
    if (g["family"]) {
      one_of(g["family"], "graph.family", c.graph.family,
             {"cycle", "complete", "star", "path", "petersen", "circulant", "random-regular", "subdivided-expander",
              "cut-graph", "edge-list"});
    }
    read(g, "n", "graph.n", c.graph.n);
    read(g, "d", "graph.d", c.graph.d);
    read(g, "k", "graph.k", c.graph.k);
    read(g, "ell", "graph.ell", c.graph.ell);
    read(g, "n_prime", "graph.n_prime", c.graph.n_prime);
    read(g, "phi", "graph.phi", c.graph.phi);
    read(g, "seed", "graph.seed", c.graph.seed);
    read(g, "file", "graph.file", c.graph.file);
    if (c.graph.family == "edge-list" && c.graph.file.empty()) fail(g, "graph.file", "required for edge-list");
  }

  if (const auto m = root["model"]) {
    require_map(m, "model");
    reject_unknown(m, "model", {"type", "alphas"});
    read(m, "type", "model.type", c.model);
    if (m["type"]) one_of(m["type"], "model.type", c.model, {"standard", "biased"});
    read_list(m, "alphas", "model.alphas", c.alphas);
    if (m["alphas"]) {
      if (c.alphas.empty() || c.alphas[0] != 1.0) fail(m["alphas"], "model.alphas", "alpha_0 must be 1");
      for (double a : c.alphas) {
        if (!(a > 0.0 && a <= 1.0)) fail(m["alphas"], "model.alphas", "every alpha must lie in (0, 1]");
      }
    }
  }

  if (const auto p = root["provider"]) {
    require_map(p, "provider");
    reject_unknown(p, "provider", {"type", "phi", "phi_schedule", "n_prime", "gamma"});
    read(p, "type", "provider.type", c.provider);
    if (p["type"]) {
      one_of(p["type"], "provider.type", c.provider, {"static", "schedule", "cut-adversary", "degree-adversary"});
    }
    if (p["phi"]) {
      double v = 0.0;
      read(p, "phi", "provider.phi", v);
      if (!(v > 0.0 && v <= 1.0)) fail(p["phi"], "provider.phi", "must lie in (0, 1]");
      c.phi = v;
    }
    read_list(p, "phi_schedule", "provider.phi_schedule", c.phi_schedule);
    read(p, "n_prime", "provider.n_prime", c.provider_n_prime);
    read(p, "gamma", "provider.gamma", c.gamma);
  }

  if (const auto i = root["initial"]) {
    require_map(i, "initial");
    reject_unknown(i, "initial", {"rule", "kappa", "k", "assignment"});
    read(i, "rule", "initial.rule", c.initial);
    if (i["rule"]) one_of(i["rule"], "initial.rule", c.initial, {"distinct", "split", "k-random", "explicit"});
    read(i, "kappa", "initial.kappa", c.kappa);
    read(i, "k", "initial.k", c.initial_k);
    read_list(i, "assignment", "initial.assignment", c.assignment);
    if (c.initial == "explicit" && c.assignment.empty()) fail(i, "initial.assignment", "required for explicit");
  }

  read(root, "trials", "trials", c.trials);
  read(root, "seed", "seed", c.seed);
  read(root, "max_rounds", "max_rounds", c.max_rounds);
  if (c.trials == 0) fail(root["trials"], "trials", "must be positive");

  if (const auto mo = root["monitors"]) {
    require_map(mo, "monitors");
    reject_unknown(mo, "monitors", {"good_sequence", "balance", "checkpoints", "beta"});
    read(mo, "good_sequence", "monitors.good_sequence", c.monitor_good_sequence);
    read(mo, "balance", "monitors.balance", c.monitor_balance);
    read(mo, "checkpoints", "monitors.checkpoints", c.checkpoints);
    read(mo, "beta", "monitors.beta", c.beta);
  }
  if (const auto o = root["output"]) {
    require_map(o, "output");
    reject_unknown(o, "output", {"dir"});
    read(o, "dir", "output.dir", c.out_dir);
  }
  if (const auto s = root["scaling"]) {
    require_map(s, "scaling");
    reject_unknown(s, "scaling", {"sizes"});
    read_list(s, "sizes", "scaling.sizes", c.scaling_sizes);
  }

  if (c.model == "biased") {
    if (c.initial == "distinct") fail(root["initial"] ? root["initial"] : root, "initial.rule",
                                      "biased model needs a fixed number of opinions (not distinct)");
    if (c.kappa != c.alphas.size()) {
      fail(root["initial"] ? root["initial"] : root, "initial.kappa", "must equal the number of alphas");
    }
  }
  if (c.monitor_good_sequence && c.model != "biased") {
    fail(root["monitors"], "monitors.good_sequence", "requires the biased model");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json resolved_config_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["graph"] = {{"family", c.graph.family}, {"n", c.graph.n},         {"d", c.graph.d},
                {"k", c.graph.k},           {"ell", c.graph.ell},     {"n_prime", c.graph.n_prime},
                {"phi", c.graph.phi},       {"seed", c.graph.seed},   {"file", c.graph.file}};
  j["model"] = {{"type", c.model}, {"alphas", c.alphas}};
  j["provider"] = {{"type", c.provider},
                   {"phi", c.phi ? nlohmann::json(*c.phi) : nlohmann::json(nullptr)},
                   {"phi_schedule", c.phi_schedule},
                   {"n_prime", c.provider_n_prime},
                   {"gamma", c.gamma}};
  j["initial"] = {{"rule", c.initial}, {"kappa", c.kappa}, {"k", c.initial_k}, {"assignment", c.assignment}};
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["max_rounds"] = c.max_rounds;
  j["monitors"] = {{"good_sequence", c.monitor_good_sequence},
                   {"balance", c.monitor_balance},
                   {"checkpoints", c.checkpoints},
                   {"beta", c.beta}};
  j["output"] = {{"dir", c.out_dir}};
  j["scaling"] = {{"sizes", c.scaling_sizes}};
  return j;
}

GraphParams parse_family_string(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.empty()) throw Error(ErrorCode::ConfigInvalid, "empty family string");
  GraphParams g;
  g.family = parts[0];
  auto num = [&](std::size_t i) -> std::uint64_t {
    if (i >= parts.size()) throw Error(ErrorCode::ConfigInvalid, "family string '" + text + "' is missing a field");
    try {
      return std::stoull(parts[i]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigInvalid, "family string '" + text + "': bad number '" + parts[i] + "'");
    }
  };
  if (g.family == "cycle" || g.family == "complete" || g.family == "star" || g.family == "path") {
    g.n = num(1);
  } else if (g.family == "petersen") {
  } else if (g.family == "circulant") {
    g.n = num(1);
    g.k = num(2);
  } else if (g.family == "random-regular") {
    g.n = num(1);
    g.d = num(2);
    if (parts.size() > 3) g.seed = num(3);
  } else if (g.family == "subdivided-expander") {
    g.n_prime = num(1);
    g.d = num(2);
    g.ell = num(3);
    if (parts.size() > 4) g.seed = num(4);
  } else {
    throw Error(ErrorCode::ConfigInvalid, "unknown graph family '" + g.family + "'");
  }
  return g;
}

Graph build_graph_from_params(const GraphParams& s) {
  if (s.family == "cycle") return generate_cycle(s.n);
  if (s.family == "complete") return generate_complete(s.n);
  if (s.family == "star") return generate_star(s.n);
  if (s.family == "path") return generate_path(s.n);
  if (s.family == "petersen") return generate_petersen();
  if (s.family == "circulant") return generate_circulant(s.n, s.k);
  if (s.family == "random-regular") return generate_random_regular(s.n, s.d, s.seed);
  if (s.family == "subdivided-expander") return generate_subdivided_expander(s.n_prime, s.d, s.ell, s.seed);
  if (s.family == "cut-graph") return generate_cut_graph(s.n, s.n_prime ? s.n_prime : s.n / 2, s.d, s.phi).graph;
  if (s.family == "edge-list") {
    std::ifstream in(s.file);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open edge list '" + s.file + "'");
    return read_edge_list(in, true);
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown graph family '" + s.family + "'");
}

std::vector<Opinion> build_initial_assignment(const ExperimentConfig& c, const Graph& g, Rng& rng) {
  const std::size_t n = g.node_count();
  if (c.initial == "distinct") {
    std::vector<Opinion> a(n);
    std::iota(a.begin(), a.end(), Opinion{0});
    return a;
  }
  if (c.initial == "explicit") {
    if (c.assignment.size() != n) {
      throw Error(ErrorCode::ConfigInvalid, "initial.assignment: has " + std::to_string(c.assignment.size()) +
                                                " entries, graph has " + std::to_string(n) + " nodes");
    }
    for (Opinion o : c.assignment) {
      if (o >= c.kappa) throw Error(ErrorCode::ConfigInvalid, "initial.assignment: opinion out of range");
    }
    return c.assignment;
  }
  if (c.kappa < 2) throw Error(ErrorCode::ConfigInvalid, "initial.kappa: must be at least 2");
  std::vector<Opinion> a(n);
  if (c.initial == "split") {
    // Contiguous blocks of near-equal size.
    for (std::size_t u = 0; u < n; ++u) a[u] = static_cast<Opinion>(u * c.kappa / n);
    return a;
  }
  // k-random: k uniform nodes hold opinion 0, the rest uniform over 1..kappa-1.
  if (c.initial_k == 0 || c.initial_k >= n) throw Error(ErrorCode::ConfigInvalid, "initial.k: must lie in [1, n)");
  std::vector<Node> ids(n);
  std::iota(ids.begin(), ids.end(), Node{0});
  for (std::size_t i = 0; i < c.initial_k; ++i) std::swap(ids[i], ids[i + rng.below(n - i)]);
  for (std::size_t i = 0; i < n; ++i) {
    a[ids[i]] = i < c.initial_k ? 0 : static_cast<Opinion>(1 + (c.kappa > 2 ? rng.below(c.kappa - 1) : 0));
  }
  return a;
}

std::unique_ptr<GraphProvider> build_provider(const ExperimentConfig& c, std::shared_ptr<const Graph> g) {
  const std::size_t n = g->node_count();
  auto schedule = [&]() -> PhiSchedule {
    if (!c.phi_schedule.empty()) return cyclic_schedule(c.phi_schedule);
    if (c.phi) return constant_schedule(*c.phi);
    throw Error(ErrorCode::ConfigInvalid, "provider: phi or phi_schedule required for " + c.provider);
  };
  if (c.provider == "static") return std::make_unique<StaticProvider>(std::move(g), c.phi);
  if (c.provider == "schedule") {
    return std::make_unique<ScheduleProvider>(n, c.provider_n_prime ? c.provider_n_prime : n / 2, c.graph.d,
                                              schedule(), c.seed, c.gamma);
  }
  if (c.provider == "cut-adversary") return std::make_unique<AdaptiveCutAdversary>(n, c.graph.d, schedule(), c.gamma);
  return std::make_unique<DegreeChangingAdversary>(n, c.phi.value_or(0.0));
}

RunOptions build_run_options(const ExperimentConfig& c) {
  RunOptions o;
  o.model = c.model == "biased" ? Model::Biased : Model::Standard;
  if (o.model == Model::Biased) o.bias = BiasConfig(c.alphas);
  o.max_rounds = c.max_rounds;
  o.record_rows = c.checkpoints;
  o.check_balance = c.monitor_balance;
  o.record_steps = c.monitor_good_sequence;
  o.regeneration = c.monitor_good_sequence;
  o.allow_nonregular = c.provider == "degree-adversary";
  return o;
}

}  // namespace voterlab
