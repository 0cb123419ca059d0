#include "voterlab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "voterlab/adversary.hpp"
#include "voterlab/coalescing.hpp"
#include "voterlab/conductance.hpp"
#include "voterlab/dynamics.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/generators.hpp"
#include "voterlab/oracle.hpp"
#include "voterlab/stats.hpp"
#include "voterlab/step_schedule.hpp"

namespace voterlab {

bool SuiteResult::pass() const {
  return !verdicts.empty() && std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

nlohmann::json SuiteResult::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  j["pass"] = pass();
  j["verdicts"] = nlohmann::json::array();
  for (const auto& v : verdicts) j["verdicts"].push_back({{"claim", v.claim}, {"pass", v.pass}, {"numbers", v.numbers}});
  return j;
}

namespace {

std::size_t scaled(std::size_t base, const SuiteOptions& o, std::size_t floor = kMinTrials) {
  return std::max(floor, static_cast<std::size_t>(std::llround(static_cast<double>(base) * o.scale)));
}

std::uint64_t sub_seed(const SuiteOptions& o, std::uint64_t tag) { return o.seed * 0x9E3779B97F4A7C15ULL + tag; }

std::vector<Opinion> mask_assignment(std::size_t n, std::uint32_t mask) {
  std::vector<Opinion> a(n);
  for (Node u = 0; u < n; ++u) a[u] = ((mask >> u) & 1U) ? 0 : 1;
  return a;
}

// Uniform random subset of size k (partial Fisher-Yates), sorted.
std::vector<Node> random_subset(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<Node> ids(n);
  std::iota(ids.begin(), ids.end(), Node{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(ids[i], ids[i + rng.below(n - i)]);
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

// ---- Suites ------------------------------------------------------------------

SuiteResult suite_drift_upper(const SuiteOptions&) {
  SuiteResult r{"drift-upper", {}};
  const std::vector<std::pair<std::string, Graph>> graphs{
      {"C_6", generate_cycle(6)}, {"K_5", generate_complete(5)}, {"Petersen", generate_petersen()}};
  for (const auto& [name, g] : graphs) {
    const std::size_t n = g.node_count();
    std::size_t states = 0, violations = 0, statement_violations = 0;
    double min_margin = INFINITY;
    for (std::uint32_t s = 1; s + 1 < (1U << n); ++s) {
      const auto cert = verify_drift_upper(g, OpinionState(g, mask_assignment(n, s), 2));
      ++states;
      violations += !cert.satisfied;
      statement_violations += !cert.statement_satisfied;
      min_margin = std::min(min_margin, cert.bound_upper - cert.exact_expected_psi_next);
    }
    r.verdicts.push_back({"E[Psi'] <= Psi - sum_{s_t} lambda d / (32 Psi^3) on every state of " + name,
                          violations == 0,
                          {{"graph", name},
                           {"states", states},
                           {"violations", violations},
                           {"statement_form_violations", statement_violations},
                           {"min_margin", min_margin}}});
  }
  return r;
}

SuiteResult suite_drift_lower(const SuiteOptions& o) {
  SuiteResult r{"drift-lower", {}};
  const std::size_t n = 24, d = 6;
  const double phi = 0.05;
  const std::size_t lo = 7, hi = 12;  // both cut-graph sides need more than d nodes
  // c: the largest cut constant the generator reaches over the sampled side sizes.
  double c = 0.0;
  for (std::size_t np = lo; np <= hi; ++np) {
    c = std::max(c, static_cast<double>(generate_cut_graph(n, np, d, phi).cut) / (phi * d * n));
  }
  AdaptiveCutAdversary adv(n, d, constant_schedule(phi));
  const std::size_t samples = scaled(200, o, 20);
  Rng rng(sub_seed(o, 5));
  const Graph scratch = generate_cycle(n);
  std::size_t violations = 0;
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> by_size;  // n' -> (states, violations)
  double worst = INFINITY;
  nlohmann::json examples = nlohmann::json::array();
  for (std::size_t i = 0; i < samples; ++i) {
    const std::size_t np = lo + rng.below(hi - lo + 1);
    const auto side = random_subset(n, np, rng);
    OpinionState s = OpinionState::two_sided(scratch, side);
    const auto g = adv.respond(1, s);
    s.rebind(*g);
    const auto cert = verify_drift_lower(*g, s, c * (1.0 + 1e-12), phi);
    auto& [cnt, bad] = by_size[np];
    ++cnt;
    if (!cert.satisfied) {
      ++violations;
      ++bad;
      if (examples.size() < 5) examples.push_back(nlohmann::json::parse(certificate_json(cert, true)));
    }
    worst = std::min(worst, cert.exact_expected_psi_next - *cert.bound_lower);
  }
  nlohmann::json sizes;
  for (const auto& [np, cb] : by_size) sizes[std::to_string(np)] = {{"states", cb.first}, {"violations", cb.second}};
  r.verdicts.push_back({"E[Psi'] >= Psi - c phi d / Psi on sampled cut-adversary states (n=24, d=6)", violations == 0,
                        {{"states", samples},
                         {"phi", phi},
                         {"c", c},
                         {"violations", violations},
                         {"by_side_size", sizes},
                         {"min_margin", worst},
                         {"violating_examples", examples}}});
  return r;
}

SuiteResult suite_duality(const SuiteOptions& o) {
  SuiteResult r{"duality", {}};
  const std::size_t trials = scaled(100'000, o);
  const std::vector<std::pair<std::string, Graph>> graphs{{"C_6", generate_cycle(6)}, {"K_4", generate_complete(4)}};
  std::uint64_t tag = 10;
  for (const auto& [name, graph] : graphs) {
    const auto g = std::make_shared<const Graph>(graph);
    const auto coalescing = collect_trials(trials, sub_seed(o, tag++), o.threads, [&](std::size_t, Rng& rng) {
      return static_cast<double>(*coalescing_time(*g, rng));
    });
    const auto consensus = collect_trials(trials, sub_seed(o, tag++), o.threads, [&](std::size_t, Rng& rng) {
      StaticProvider p(g, 1.0);
      return static_cast<double>(*run_until_consensus(p, OpinionState::distinct(*g), {}, rng).consensus_time);
    });
    const auto ks = ks_two_sample(coalescing, consensus);
    const double exact = exact_expected_consensus_time(*g, OpinionState::distinct(*g)).expected_absorption_time;
    const auto ec = estimate(coalescing), ev = estimate(consensus);
    r.verdicts.push_back({"KS(coalescing time, distinct-opinion consensus time) does not reject at 1e-3 on " + name,
                          ks.p_value >= 1e-3,
                          {{"graph", name},
                           {"samples", trials},
                           {"ks_statistic", ks.statistic},
                           {"p_value", ks.p_value},
                           {"mean_coalescing", ec.mean},
                           {"mean_consensus", ev.mean},
                           {"exact_expected_T", exact}}});
  }
  return r;
}

SuiteResult suite_fixation(const SuiteOptions& o) {
  SuiteResult r{"fixation", {}};
  std::vector<std::pair<std::string, Graph>> graphs;
  for (std::size_t n = 3; n <= 8; ++n) graphs.emplace_back("C_" + std::to_string(n), generate_cycle(n));
  for (std::size_t n = 2; n <= 8; ++n) graphs.emplace_back("K_" + std::to_string(n), generate_complete(n));
  for (auto [n, d] : std::vector<std::pair<std::size_t, std::size_t>>{{6, 3}, {8, 3}, {7, 4}, {8, 4}, {8, 5}}) {
    graphs.emplace_back("RR(" + std::to_string(n) + "," + std::to_string(d) + ")",
                        generate_random_regular(n, d, sub_seed(o, 100 + n * 10 + d)));
  }
  for (std::size_t n = 3; n <= 8; ++n) graphs.emplace_back("Star_" + std::to_string(n), generate_star(n));
  // Monte Carlo comparisons also cover n = 9, 10 via the floating solver.
  graphs.emplace_back("C_10", generate_cycle(10));
  graphs.emplace_back("Petersen", generate_petersen());

  const std::size_t trials = scaled(100'000, o);
  Rng pick(sub_seed(o, 20));
  std::uint64_t tag = 200;
  for (const auto& [name, graph] : graphs) {
    const auto g = std::make_shared<const Graph>(graph);
    const std::size_t n = g->node_count();
    const auto table = fixation_table(*g);
    const double two_m = 2.0 * static_cast<double>(g->edge_count());
    double law_dev = 0.0;
    for (std::uint32_t s = 0; s < table.prevail.size(); ++s) {
      double vol = 0.0;
      for (Node u = 0; u < n; ++u) vol += ((s >> u) & 1U) ? g->degree(u) : 0.0;
      law_dev = std::max(law_dev, std::abs(table.prevail[s] - vol / two_m));
    }
    const std::uint32_t full = (1U << n) - 1;
    const std::uint32_t mask = 1 + static_cast<std::uint32_t>(pick.below(full - 1));
    const double p = table.prevail[mask];
    const auto hits = collect_trials(trials, sub_seed(o, tag++), o.threads, [&](std::size_t, Rng& rng) {
      StaticProvider provider(g, 1.0);
      const auto t = run_until_consensus(provider, OpinionState(*g, mask_assignment(n, mask), 2), {}, rng);
      return *t.winner == 0 ? 1.0 : 0.0;
    });
    const double freq = std::accumulate(hits.begin(), hits.end(), 0.0) / static_cast<double>(trials);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    const bool mc_ok = std::abs(freq - p) <= 4.0 * sigma;
    const bool law_ok = law_dev <= 1e-10;
    nlohmann::json numbers{{"graph", name},
                           {"n", n},
                           {"regular", g->is_regular()},
                           {"rational", table.rational},
                           {"max_dev_from_vol_over_2m", law_dev},
                           {"mc_start_mask", mask},
                           {"exact", p},
                           {"mc_frequency", freq},
                           {"trials", trials},
                           {"sigma", sigma}};
    if (table.rational) numbers["exact_rational"] = table.prevail_exact[mask];
    r.verdicts.push_back({"fixation probability = vol/2m (k/n when regular) and MC within 4 sigma on " + name,
                          mc_ok && law_ok, numbers});
  }
  return r;
}

SuiteResult suite_chernoff(const SuiteOptions& o) {
  SuiteResult r{"chernoff", {}};
  const std::size_t trials = scaled(1'000'000, o);
  const auto g = std::make_shared<const Graph>(generate_random_regular(32, 6, sub_seed(o, 30)));
  std::vector<Opinion> init(32, 1);
  for (Node u = 0; u < 16; ++u) init[u] = 0;
  struct Family {
    std::unique_ptr<SequenceGenerator> gen;
    double b;
  };
  std::vector<Family> families;
  families.push_back({iid_generator(), 50.0});
  families.push_back({momentum_generator(), 50.0});
  families.push_back({contrarian_generator(), 50.0});
  families.push_back({voter_gain_generator(g, init, 0.5), 20.0});
  families.push_back({voter_loss_generator(g, init, 0.5), 20.0});
  const double delta = 0.5;
  std::uint64_t tag = 300;
  for (const auto& f : families) {
    for (auto part : {ChernoffPart::Upper, ChernoffPart::Lower}) {
      const auto rep = dependent_chernoff_check(*f.gen, part, f.b, delta, trials, sub_seed(o, tag++), o.threads);
      const std::string which = part == ChernoffPart::Upper ? "(a) P(Z > (1+delta) b)" : "(b) P(Z < (1-delta) b)";
      r.verdicts.push_back({which + " <= bound + 3 sigma for " + rep.family, rep.pass,
                            {{"family", rep.family},
                             {"part", part == ChernoffPart::Upper ? "a" : "b"},
                             {"b", rep.b},
                             {"delta", rep.delta},
                             {"trials", rep.trials},
                             {"empirical", rep.empirical},
                             {"sigma", rep.sigma},
                             {"bound", rep.bound},
                             {"min_sum_p", rep.min_b_total},
                             {"max_sum_p", rep.max_b_total}}});
    }
  }
  return r;
}

struct AdversarySetup {
  std::size_t n = 200;
  std::size_t d = 6;
  double phi = 0.01;
  double gamma = 0.125;
};

// Largest cut constant of the cut-graph family over side sizes gamma n .. n/2.
double adversary_c(const AdversarySetup& s) {
  double c = 0.0;
  const auto lo = static_cast<std::size_t>(std::ceil(s.gamma * static_cast<double>(s.n)));
  for (std::size_t np = std::max(lo, s.d + 1); np <= s.n / 2; ++np) {
    c = std::max(c, static_cast<double>(generate_cut_graph(s.n, np, s.d, s.phi, s.gamma).cut) /
                        (s.phi * static_cast<double>(s.d * s.n)));
  }
  return c;
}

std::vector<Opinion> balanced_random(std::size_t n, Rng& rng) {
  std::vector<Opinion> a(n, 1);
  for (Node u : random_subset(n, n / 2, rng)) a[u] = 0;
  return a;
}

SuiteResult suite_submartingale(const SuiteOptions& o) {
  SuiteResult r{"submartingale", {}};
  const AdversarySetup setup;
  const double c = adversary_c(setup);
  const std::size_t tau_pp = static_cast<std::size_t>(std::ceil((static_cast<double>(setup.n) / 19.0) / setup.phi - 1e-9));
  const std::size_t states = scaled(100, o, 10);
  const std::size_t samples = scaled(20'000, o, 200);
  const Graph scratch = generate_cycle(setup.n);
  std::size_t failures = 0, checked = 0;
  double worst = INFINITY;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; checked < states && i < 20 * states; ++i) {
    Rng rng = trial_rng(sub_seed(o, 40), i);
    AdaptiveCutAdversary adv(setup.n, setup.d, constant_schedule(setup.phi), setup.gamma);
    OpinionState s(scratch, balanced_random(setup.n, rng), 2);
    const std::size_t stop = 1 + rng.below(tau_pp);
    const Graph* bound = nullptr;
    std::vector<Change> changes;
    for (std::size_t t = 1; t <= stop && !s.is_consensus(); ++t) {
      const auto rg = adv.next(t, s, {});
      if (rg.graph.get() != bound) {
        s.rebind(*rg.graph);
        bound = rg.graph.get();
      }
      changes.clear();
      standard_voter_changes(*rg.graph, s, rng, changes);
      s.apply(*rg.graph, changes);
    }
    const std::size_t small = std::min(s.count(0), s.count(1));
    if (static_cast<double>(small) < setup.gamma * static_cast<double>(setup.n)) continue;
    const auto g = adv.respond(stop + 1, s);
    const auto res = submartingale_check(*g, s, setup.phi, c, samples, rng);
    ++checked;
    failures += !res.pass;
    worst = std::min(worst, res.mean + 3.0 * res.se);
    if (rows.size() < 10 || !res.pass) {
      if (rows.size() < 25) {
        rows.push_back({{"round", stop}, {"minority", small}, {"psi", res.psi}, {"mean", res.mean}, {"se", res.se}});
      }
    }
  }
  // A consensus state: Psi = 0 and the increment is exactly phi.
  {
    Rng rng(sub_seed(o, 41));
    const Graph g = generate_cut_graph(setup.n, setup.n / 2, setup.d, setup.phi).graph;
    const auto res = submartingale_check(g, OpinionState(g, std::vector<Opinion>(setup.n, 0), 2), setup.phi, c, 200, rng);
    r.verdicts.push_back({"consensus state: Z increments by exactly phi", std::abs(res.mean - setup.phi) < 1e-15,
                          {{"mean", res.mean}}});
  }
  r.verdicts.push_back({"E[Z_{t+1} - Z_t | state] + 3 SE >= 0 at sampled adversary states (|s_t| >= gamma n)",
                        failures == 0 && checked == states,
                        {{"states", checked},
                         {"failures", failures},
                         {"samples_per_state", samples},
                         {"c", c},
                         {"phi", setup.phi},
                         {"min_mean_plus_3se", worst},
                         {"rows", rows}}});
  return r;
}

SuiteResult suite_balance(const SuiteOptions& o) {
  SuiteResult r{"balance", {}};
  const std::size_t runs = scaled(1000, o, 10);
  const std::size_t n = 128, d = 6;
  std::vector<std::shared_ptr<const Graph>> graphs;
  for (std::uint64_t k = 0; k < 10; ++k) {
    graphs.push_back(std::make_shared<const Graph>(generate_random_regular(n, d, sub_seed(o, 500 + k))));
  }
  std::size_t gap_violations = 0, length_violations = 0, prime_violations = 0, intervals = 0, steps = 0;
  std::uint32_t max_gap = 0;
  std::int64_t max_slack = INT64_MIN;
  for (std::size_t i = 0; i < runs; ++i) {
    Rng rng = trial_rng(sub_seed(o, 50), i);
    const auto& g = graphs[i % graphs.size()];
    StaticProvider provider(g, 1.0);
    RunOptions opt;
    opt.model = Model::Biased;
    opt.bias = BiasConfig({1.0, 0.5});
    opt.record_steps = true;
    std::vector<Opinion> a(n, 1);
    for (Node u : random_subset(n, 1 + rng.below(n - 1), rng)) a[u] = 0;
    try {
      const auto trace = run_until_consensus(provider, OpinionState(*g, a, 2), opt, rng);
      max_gap = std::max(max_gap, trace.max_balance_gap);
      steps += trace.steps.size();
      const auto rep = check_intervals(trace.steps, static_cast<std::uint32_t>(d), 200, rng);
      intervals += rep.checked;
      length_violations += rep.length_violations;
      prime_violations += rep.prime_violations;
      max_slack = std::max(max_slack, rep.max_length_slack);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvariantViolation) throw;
      ++gap_violations;
    }
  }
  r.verdicts.push_back({"|Lambda - Lambda'| <= d at every step", gap_violations == 0 && max_gap <= d,
                        {{"runs", runs}, {"steps", steps}, {"violations", gap_violations}, {"max_gap", max_gap}, {"d", d}}});
  r.verdicts.push_back({"|I_{i,k}| <= 2k + 2d and Lambda'(S_{i,k}) - Lambda'(i) <= k + 2d on sampled (i, k)",
                        length_violations == 0 && prime_violations == 0,
                        {{"intervals", intervals},
                         {"length_violations", length_violations},
                         {"prime_violations", prime_violations},
                         {"max_length_slack", max_slack}}});
  return r;
}

// 50 random (graph, two-opinion state) pairs with at most 8 boundary nodes.
std::vector<std::pair<Graph, OpinionState>> law_instances(const SuiteOptions& o) {
  const std::size_t count = scaled(50, o, 5);
  std::vector<std::pair<Graph, OpinionState>> out;
  Rng rng(sub_seed(o, 60));
  while (out.size() < count) {
    Graph g;
    switch (rng.below(4)) {
      case 0: g = generate_cycle(4 + rng.below(12)); break;
      case 1: g = generate_random_regular(6 + 2 * rng.below(4), 3, rng()); break;
      case 2: g = generate_circulant(9 + rng.below(4), 2); break;
      default: g = generate_complete(3 + rng.below(4)); break;
    }
    const std::size_t n = g.node_count();
    // Contiguous-ish blocks keep the boundary small.
    std::vector<Opinion> a(n, 1);
    const std::size_t start = rng.below(n), len = 1 + rng.below(n - 1);
    for (std::size_t i = 0; i < len; ++i) a[(start + i) % n] = 0;
    OpinionState s(g, a, 2);
    if (s.is_consensus() || s.boundary().size() > 8) continue;
    out.emplace_back(std::move(g), std::move(s));
  }
  return out;
}

double third_moment_scale(const std::vector<Law>& laws) {
  double scale = 1.0;
  for (const auto& law : laws) {
    for (auto [v, p] : law) scale += p * std::abs(v * v * v);
  }
  return scale;
}

SuiteResult suite_moments(const SuiteOptions& o) {
  SuiteResult r{"moments", {}};
  std::size_t pairs = 0, failures = 0;
  double worst_rel = 0.0, worst_abs = 0.0;
  for (const auto& [g, s] : law_instances(o)) {
    const auto laws = dominance_laws(g, s);
    for (const auto* family : {&laws.x, &laws.y}) {
      const auto rep = third_moment_identity(*family);
      const double rel = rep.max_abs_deviation / third_moment_scale(*family);
      worst_rel = std::max(worst_rel, rel);
      worst_abs = std::max(worst_abs, rep.max_abs_deviation);
      failures += rel > 1e-12;
    }
    ++pairs;
  }
  r.verdicts.push_back({"E[(sum Z)^3] = sum E[Z^3] - 3E[Z^2]E[Z] + 2E[Z]^3 on X and Y families", failures == 0,
                        {{"pairs", pairs},
                         {"failures", failures},
                         {"max_abs_deviation", worst_abs},
                         {"max_relative_deviation", worst_rel}}});
  return r;
}

SuiteResult suite_dominance(const SuiteOptions& o) {
  SuiteResult r{"dominance", {}};
  std::size_t pairs = 0, checks = 0, failures = 0, linear_failures = 0;
  double worst = -INFINITY;
  for (const auto& [g, s] : law_instances(o)) {
    const auto laws = dominance_laws(g, s);
    const double k = g.max_degree();
    const auto rep = concave_dominance_check(
        laws.x, laws.y, {sqrt_shift(laws.minority_volume), neg_square(), min_cap(0.0), min_cap(k), linear(1.0)});
    for (const auto& res : rep.results) {
      const double tol = 1e-12 * std::max(1.0, std::abs(res.ey));
      if (res.name.find("*x") != std::string::npos) {
        linear_failures += std::abs(res.ex - res.ey) > tol;
        continue;
      }
      if (!res.concave_on_support) continue;
      ++checks;
      failures += !res.holds;
      worst = std::max(worst, res.ex - res.ey);
    }
    ++pairs;
  }
  r.verdicts.push_back({"E[f(sum X)] <= E[f(sum Y)] for concave f; equality for linear f",
                        failures == 0 && linear_failures == 0,
                        {{"pairs", pairs},
                         {"concave_checks", checks},
                         {"failures", failures},
                         {"linear_failures", linear_failures},
                         {"max_ex_minus_ey", worst}}});
  return r;
}

SuiteResult merge(std::string name, std::initializer_list<SuiteResult> parts) {
  SuiteResult r{std::move(name), {}};
  for (const auto& p : parts) r.verdicts.insert(r.verdicts.end(), p.verdicts.begin(), p.verdicts.end());
  return r;
}

// Exact one-round marginals on the degree-changing adversary's graph at n = 12.
SuiteResult degree_adversary_check() {
  SuiteResult r{"degree-adversary", {}};
  const std::size_t n = 12;
  nlohmann::json rows = nlohmann::json::array();
  bool ok = true;
  for (std::size_t k = 1; k < n / 2; ++k) {
    std::vector<Opinion> a(n, 1);
    for (Node u = 0; u < k; ++u) a[u] = 0;
    const Graph g = DegreeChangingAdversary::build(a);
    const OpinionState s(g, a, 2);
    // Only boundary nodes can move; enumerate their joint flips.
    const auto b = s.boundary();
    double shrink = 0.0, majority_moves = 1.0;
    for (std::uint32_t f = 0; f < (1U << b.size()); ++f) {
      double p = 1.0;
      std::int64_t delta = 0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        const double q = s.discordance(b[i]) / (2.0 * g.degree(b[i]));
        const bool flip = (f >> i) & 1U;
        p *= flip ? q : 1.0 - q;
        if (flip) delta += s.opinion(b[i]) == 0 ? -1 : 1;
      }
      if (delta < 0) shrink += p;
    }
    for (Node u : b) {
      if (s.opinion(u) == 1) majority_moves *= 1.0 - s.discordance(u) / (2.0 * g.degree(u));
    }
    majority_moves = 1.0 - majority_moves;
    const bool in_scope = k >= 2;
    const bool row_ok = shrink <= 4.0 / static_cast<double>(n) && majority_moves >= 0.25;
    if (in_scope) ok = ok && row_ok;
    rows.push_back({{"minority", k}, {"p_shrink", shrink}, {"p_majority_flip", majority_moves}, {"checked", in_scope},
                    {"holds", row_ok}});
  }
  r.verdicts.push_back({"degree adversary (n=12): P(minority shrinks) <= 4/n and P(majority node flips) >= 1/4", ok,
                        {{"rows", rows}}});
  return r;
}

}  // namespace

// ---- Criteria ------------------------------------------------------------------

SuiteResult suite_cycle_scaling(const SuiteOptions& o, const std::vector<std::size_t>& sizes, std::size_t trials) {
  SuiteResult r{"cycle-scaling", {}};
  trials = scaled(trials, o);
  std::vector<double> ns, medians;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t n : sizes) {
    const auto g = std::make_shared<const Graph>(generate_cycle(n));
    const auto samples = collect_trials(trials, sub_seed(o, 70 + n), o.threads, [&](std::size_t, Rng& rng) {
      StaticProvider provider(g, 2.0 / static_cast<double>(n));
      return static_cast<double>(*run_until_consensus(provider, OpinionState::distinct(*g), {}, rng).consensus_time);
    });
    const auto e = estimate(samples);
    ns.push_back(static_cast<double>(n));
    medians.push_back(e.median);
    rows.push_back({{"n", n}, {"trials", trials}, {"median", e.median}, {"median_ci", {e.median_ci.lo, e.median_ci.hi}},
                    {"mean", e.mean}});
  }
  const auto fit = fit_scaling(ns, medians);
  r.verdicts.push_back({"cycle consensus time exponent of median T in [1.85, 2.15]",
                        fit.exponent >= 1.85 && fit.exponent <= 2.15,
                        {{"exponent", fit.exponent}, {"stderr", fit.stderr_exponent}, {"r2", fit.r_squared}, {"sizes", rows}}});
  return r;
}

SuiteResult suite_static_bound(const SuiteOptions& o) {
  SuiteResult r{"static-bound", {}};
  struct Case {
    std::string name;
    Graph g;
    double phi;
    std::string phi_source;
  };
  std::vector<Case> cases;
  for (std::size_t n : {16, 64, 256}) {
    cases.push_back({"C_" + std::to_string(n), generate_cycle(n), 2.0 / static_cast<double>(n), "2/n (exact for even n)"});
  }
  for (std::size_t n : {16, 64, 256, 512}) {
    Graph g = generate_random_regular(n, 3, sub_seed(o, 80 + n));
    const auto c = conductance(g);
    cases.push_back({"RR3_" + std::to_string(n), std::move(g), conductance_lower_bound(c),
                     c.mode == ConductanceMode::Exact ? "exact" : "cheeger lower"});
  }
  const std::size_t trials = scaled(200, o);
  std::uint64_t tag = 800;
  for (auto& cs : cases) {
    const auto g = std::make_shared<const Graph>(std::move(cs.g));
    const double n = static_cast<double>(g->node_count());
    const double m = static_cast<double>(g->edge_count());
    const double bound = std::min(m / (g->min_degree() * cs.phi), n * std::log(n) / (cs.phi * cs.phi));
    const auto cap = static_cast<std::size_t>(std::ceil(4.0 * bound)) + 1;
    const auto samples = collect_trials(trials, sub_seed(o, tag++), o.threads, [&](std::size_t, Rng& rng) {
      StaticProvider provider(g, cs.phi);
      RunOptions opt;
      opt.max_rounds = cap;
      const auto t = run_until_consensus(provider, OpinionState::distinct(*g), opt, rng);
      return t.consensus_time ? static_cast<double>(*t.consensus_time) : INFINITY;
    });
    std::optional<int> best;
    nlohmann::json per_c = nlohmann::json::array();
    for (int c = 1; c <= 4; ++c) {
      const auto hits = static_cast<std::size_t>(
          std::count_if(samples.begin(), samples.end(), [&](double t) { return t <= c * bound; }));
      const double p_value = binomial_lower_p_value(hits, trials, 0.5);
      per_c.push_back({{"C", c}, {"fraction", static_cast<double>(hits) / trials}, {"p_value", p_value}});
      if (!best && p_value >= 0.01) best = c;
    }
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    r.verdicts.push_back({"P(T <= C min(m/(d_min phi), n ln n / phi^2)) >= 1/2 (binomial test at 1%) with C <= 4 on " +
                              cs.name,
                          best.has_value(),
                          {{"graph", cs.name},
                           {"phi", cs.phi},
                           {"phi_source", cs.phi_source},
                           {"bound", bound},
                           {"median_T", quantile_sorted(sorted, 0.5)},
                           {"trials", trials},
                           {"smallest_C", best ? nlohmann::json(*best) : nlohmann::json(nullptr)},
                           {"per_C", per_c}}});
  }
  return r;
}

namespace {

struct BiasedSetup {
  std::size_t d = 8;
  double alpha1 = 0.5;
};

std::vector<Opinion> preferred_seed(std::size_t n, Rng& rng) {
  const auto k = static_cast<std::size_t>(std::ceil(8.0 * std::log(static_cast<double>(n))));
  std::vector<Opinion> a(n, 1);
  for (Node u : random_subset(n, k, rng)) a[u] = 0;
  return a;
}

}  // namespace

SuiteResult suite_biased_consensus(const SuiteOptions& o) {
  SuiteResult r{"biased-consensus", {}};
  const BiasedSetup setup;
  const std::size_t trials = scaled(1000, o);
  std::vector<double> log_ns, mean_ts;
  nlohmann::json rows = nlohmann::json::array();
  std::vector<double> ratios;  // T phi / ln n for preferred wins, +inf otherwise
  bool prevail_ok = true;
  for (std::size_t n : {256, 512, 1024}) {
    const auto g = std::make_shared<const Graph>(generate_random_regular(n, setup.d, sub_seed(o, 90 + n)));
    const double phi = conductance_lower_bound(conductance(*g));
    const double ln_n = std::log(static_cast<double>(n));
    const auto samples = collect_trials(trials, sub_seed(o, 900 + n), o.threads, [&](std::size_t, Rng& rng) {
      StaticProvider provider(g, phi);
      RunOptions opt;
      opt.model = Model::Biased;
      opt.bias = BiasConfig({1.0, setup.alpha1});
      opt.max_rounds = 1'000'000;
      const auto t = run_until_consensus(provider, OpinionState(*g, preferred_seed(n, rng), 2), opt, rng);
      // Encode the winner in the sign: negative when the preferred opinion lost.
      const double time = t.consensus_time ? static_cast<double>(*t.consensus_time) : 1e12;
      return t.winner && *t.winner == 0 ? time : -time;
    });
    std::size_t wins = 0;
    double sum_t = 0.0;
    for (double s : samples) {
      wins += s > 0;
      sum_t += std::abs(s);
      ratios.push_back(s > 0 ? s * phi / ln_n : INFINITY);
    }
    const double frac = static_cast<double>(wins) / static_cast<double>(trials);
    prevail_ok = prevail_ok && frac >= 0.99;
    log_ns.push_back(ln_n);
    mean_ts.push_back(sum_t / static_cast<double>(trials));
    rows.push_back({{"n", n}, {"phi_lower", phi}, {"prevail_fraction", frac}, {"mean_T", mean_ts.back()},
                    {"initial_preferred", static_cast<std::size_t>(std::ceil(8.0 * ln_n))}});
  }
  std::sort(ratios.begin(), ratios.end());
  const double c_fit = quantile_sorted(ratios, 0.99);
  const auto fit = fit_loglog(log_ns, mean_ts);
  r.verdicts.push_back({"preferred opinion prevails in >= 99% of runs at every n", prevail_ok,
                        {{"sizes", rows}, {"C_99", c_fit}}});
  r.verdicts.push_back({"mean T grows like ln n: exponent of T against ln n within 1 +- 0.3",
                        std::abs(fit.exponent - 1.0) <= 0.3,
                        {{"exponent", fit.exponent}, {"stderr", fit.stderr_exponent}}});
  return r;
}

SuiteResult suite_good_sequence(const SuiteOptions& o) {
  SuiteResult r{"good-sequence", {}};
  const BiasedSetup setup;
  const std::size_t n = 512;
  const std::size_t trials = scaled(1000, o);
  const auto g = std::make_shared<const Graph>(generate_random_regular(n, setup.d, sub_seed(o, 90 + n)));
  const double phi = conductance_lower_bound(conductance(*g));
  const BiasConfig bias({1.0, setup.alpha1});
  std::size_t clean = 0, a_holds = 0, vb = 0, vc = 0, vd = 0;
  GoodSequenceReport sample_report;
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng = trial_rng(sub_seed(o, 95), i);
    StaticProvider provider(g, phi);
    RunOptions opt;
    opt.model = Model::Biased;
    opt.bias = bias;
    opt.regeneration = true;
    opt.record_steps = true;
    const auto t = run_until_consensus(provider, OpinionState(*g, preferred_seed(n, rng), 2), opt, rng);
    const auto rep = monitor_good_sequence(t.steps, bias, {n, static_cast<std::uint32_t>(setup.d), 8.0, {}, {}});
    clean += rep.clean_bcd();
    a_holds += rep.a_holds;
    vb += rep.violations_b > 0;
    vc += rep.violations_c > 0;
    vd += rep.violations_d > 0;
    if (i == 0) sample_report = rep;
  }
  const double frac = static_cast<double>(clean) / static_cast<double>(trials);
  r.verdicts.push_back({">= 95% of runs have no violation of properties (b)-(d)", frac >= 0.95,
                        {{"runs", trials},
                         {"clean_fraction", frac},
                         {"a_holds_fraction", static_cast<double>(a_holds) / static_cast<double>(trials)},
                         {"runs_with_b", vb},
                         {"runs_with_c", vc},
                         {"runs_with_d", vd},
                         {"ell", sample_report.ell},
                         {"beta_prime", sample_report.beta_prime},
                         {"T_prime", sample_report.T_prime},
                         {"d_intervals_first_run", sample_report.intervals_d}}});
  return r;
}

SuiteResult suite_adversary_lower_bound(const SuiteOptions& o) {
  SuiteResult r{"adversary-lower-bound", {}};
  const AdversarySetup setup;
  const ThresholdConstants constants;
  const std::size_t trials = scaled(1000, o);
  const std::size_t tau_pp =
      static_cast<std::size_t>(std::ceil(constants.tau_pp * static_cast<double>(setup.n) / setup.phi - 1e-9));
  const Graph scratch = generate_cycle(setup.n);
  double achieved_c = 0.0;
  const auto alive = collect_trials(trials, sub_seed(o, 110), o.threads, [&](std::size_t, Rng& rng) {
    AdaptiveCutAdversary adv(setup.n, setup.d, constant_schedule(setup.phi), setup.gamma);
    RunOptions opt;
    opt.max_rounds = tau_pp;
    const auto t = run_until_consensus(adv, OpinionState(scratch, balanced_random(setup.n, rng), 2), opt, rng);
    achieved_c = std::max(achieved_c, adv.achieved_c());
    return t.consensus_time ? 0.0 : 1.0;
  }, 1);
  const double frac = std::accumulate(alive.begin(), alive.end(), 0.0) / static_cast<double>(trials);
  const double sigma = std::sqrt(frac * (1.0 - frac) / static_cast<double>(trials));
  r.verdicts.push_back({"fraction of runs without consensus at tau'' >= 1/2 - 3 sigma", frac >= 0.5 - 3.0 * sigma,
                        {{"runs", trials},
                         {"tau_pp", tau_pp},
                         {"b", constants.tau_pp},
                         {"phi", setup.phi},
                         {"non_consensus_fraction", frac},
                         {"sigma", sigma},
                         {"achieved_c", achieved_c}}});
  return r;
}

// ---- Registry ------------------------------------------------------------------

const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids{"drift-upper", "drift-lower", "duality", "fixation",  "chernoff",
                                            "submartingale", "balance", "moments", "dominance"};
  return ids;
}

SuiteResult run_suite(std::string_view id, const SuiteOptions& options) {
  if (id == "drift-upper") return suite_drift_upper(options);
  if (id == "drift-lower") return suite_drift_lower(options);
  if (id == "duality") return suite_duality(options);
  if (id == "fixation") return suite_fixation(options);
  if (id == "chernoff") return suite_chernoff(options);
  if (id == "submartingale") return suite_submartingale(options);
  if (id == "balance") return suite_balance(options);
  if (id == "moments") return suite_moments(options);
  if (id == "dominance") return suite_dominance(options);
  throw Error(ErrorCode::UnknownSuite, "unknown suite '" + std::string(id) + "'");
}

const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> criteria{
      {1, "cycle consensus time scales as n^2", [](const SuiteOptions& o) { return suite_cycle_scaling(o); }},
      {2, "static upper bound min(m/(d_min phi), n ln n/phi^2)", suite_static_bound},
      {3, "coalescing/voter duality (KS)", suite_duality},
      {4, "fixation probability is degree proportional", suite_fixation},
      {5, "drift inequalities (upper sweep, lower on adversary states)",
       [](const SuiteOptions& o) { return merge("drift", {suite_drift_upper(o), suite_drift_lower(o)}); }},
      {6, "step-schedule balance and interval bounds", suite_balance},
      {7, "biased consensus in O(log n / phi)", suite_biased_consensus},
      {8, "good-sequence monitor", suite_good_sequence},
      {9, "dependent Chernoff bounds", suite_chernoff},
      {10, "third-moment identity and concave dominance",
       [](const SuiteOptions& o) { return merge("moments", {suite_moments(o), suite_dominance(o)}); }},
      {11, "adversarial lower bound, submartingale, degree adversary",
       [](const SuiteOptions& o) {
         return merge("adversary", {suite_adversary_lower_bound(o), suite_submartingale(o), degree_adversary_check()});
       }},
  };
  return criteria;
}

}  // namespace voterlab
