#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "voterlab/adversary.hpp"
#include "voterlab/dynamics.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/generators.hpp"
#include "voterlab/oracle.hpp"
#include "voterlab/step_schedule.hpp"

using namespace voterlab;

namespace {

OpinionState random_state(const Graph& g, std::size_t kappa, Rng& rng) {
  std::vector<Opinion> a(g.node_count());
  for (auto& o : a) o = static_cast<Opinion>(rng.below(kappa));
  return OpinionState(g, a, kappa);
}

// Recomputes every cached quantity from scratch and compares.
void check_fresh(const Graph& g, const OpinionState& s) {
  const OpinionState fresh(g, std::vector<Opinion>(s.assignment().begin(), s.assignment().end()), s.kappa());
  CHECK(std::equal(fresh.volumes().begin(), fresh.volumes().end(), s.volumes().begin()));
  CHECK(std::equal(fresh.counts().begin(), fresh.counts().end(), s.counts().begin()));
  CHECK(std::equal(fresh.discordances().begin(), fresh.discordances().end(), s.discordances().begin()));
  CHECK(std::equal(fresh.boundary().begin(), fresh.boundary().end(), s.boundary().begin(), s.boundary().end()));
  CHECK(fresh.discordant_edges() == s.discordant_edges());
}

double within_sigmas(double hits, double trials, double p) {
  return std::abs(hits / trials - p) / std::sqrt(p * (1 - p) / trials);
}

class WrongDegreeProvider final : public GraphProvider {
 public:
  RoundGraph next(std::size_t t, const OpinionState&, std::span<const std::vector<Opinion>>) override {
    return {t == 1 ? cycle_ : path_, 0.1};
  }
  std::span<const std::uint32_t> degree_sequence() const override { return cycle_->degrees(); }

 private:
  std::shared_ptr<const Graph> cycle_ = std::make_shared<const Graph>(generate_cycle(6));
  std::shared_ptr<const Graph> path_ = std::make_shared<const Graph>(generate_path(6));
};

}  // namespace

TEST_CASE("opinion state invariants") {
  Rng rng(1);
  const Graph g = generate_random_regular(30, 4, 3);
  for (int rep = 0; rep < 20; ++rep) {
    const OpinionState s = random_state(g, 2, rng);
    CHECK(s.volume(0) + s.volume(1) == 2 * g.edge_count());
    std::uint64_t side0 = 0, side1 = 0;
    for (Node u = 0; u < g.node_count(); ++u) {
      CHECK(s.discordance(u) <= g.degree(u));
      (s.opinion(u) == 0 ? side0 : side1) += s.discordance(u);
    }
    CHECK(side0 == side1);
    std::vector<bool> in0(g.node_count());
    for (Node u = 0; u < g.node_count(); ++u) in0[u] = s.opinion(u) == 0;
    CHECK(side0 == cut_size(g, in0));
    CHECK(s.discordant_edges() == side0);
    CHECK_NOTHROW(s.validate(g));
  }
}

TEST_CASE("incremental apply matches a fresh state") {
  Rng rng(2);
  const Graph g = generate_random_regular(40, 3, 4);
  OpinionState s = random_state(g, 3, rng);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Change> ch;
    const auto k = rng.below(6);
    std::vector<bool> used(g.node_count());
    for (std::uint64_t i = 0; i < k; ++i) {
      const Node u = static_cast<Node>(rng.below(g.node_count()));
      if (used[u]) continue;
      used[u] = true;
      ch.emplace_back(u, static_cast<Opinion>(rng.below(3)));
    }
    std::sort(ch.begin(), ch.end());
    s.apply(g, ch);
  }
  check_fresh(g, s);
}

TEST_CASE("consensus is absorbing in both models") {
  Rng rng(3);
  const Graph g = generate_circulant(12, 2);
  const OpinionState c(g, std::vector<Opinion>(12, 1), 2);
  for (int i = 0; i < 50; ++i) {
    CHECK(standard_voter_round(g, c, rng).is_consensus());
    CHECK(biased_voter_round(g, c, BiasConfig({1.0, 0.5}), rng).is_consensus());
  }
  const OpinionState all0(g, std::vector<Opinion>(12, 0), 2);
  const auto next = biased_voter_round(g, all0, BiasConfig({1.0, 0.5}), rng);
  CHECK(std::equal(next.assignment().begin(), next.assignment().end(), all0.assignment().begin()));
}

TEST_CASE("K_2 discordant: one round reaches consensus w.p. 1/2") {
  const Graph g = generate_complete(2);
  const OpinionState s(g, {0, 1}, 2);
  Rng rng(4);
  double hits = 0;
  const int trials = 100'000;
  for (int i = 0; i < trials; ++i) hits += standard_voter_round(g, s, rng).is_consensus();
  CHECK(within_sigmas(hits, trials, 0.5) < 4.0);
}

TEST_CASE("standard marginal flip probability is lambda/(2d)") {
  const Graph g = generate_circulant(10, 2);
  const OpinionState s(g, {0, 0, 1, 0, 1, 1, 0, 1, 1, 1}, 2);
  Rng rng(5);
  const int trials = 60'000;
  std::vector<double> flips(10, 0.0);
  for (int i = 0; i < trials; ++i) {
    const auto next = standard_voter_round(g, s, rng);
    for (Node u = 0; u < 10; ++u) flips[u] += next.opinion(u) != s.opinion(u);
  }
  for (Node u = 0; u < 10; ++u) {
    const double p = s.discordance(u) / (2.0 * g.degree(u));
    if (p == 0.0) {
      CHECK(flips[u] == 0.0);
    } else {
      CHECK(within_sigmas(flips[u], trials, p) < 4.0);
    }
  }
}

TEST_CASE("biased marginals") {
  const Graph g = generate_cycle(6);
  const BiasConfig bias({1.0, 0.4});
  Rng rng(6);
  // Node 2 holds opinion 1 with both neighbours preferred: flips surely.
  const OpinionState s(g, {0, 0, 1, 0, 1, 1}, 2);
  const int trials = 60'000;
  double node2 = 0, node0 = 0, node3 = 0;
  for (int i = 0; i < trials; ++i) {
    const auto next = biased_voter_round(g, s, bias, rng);
    node2 += next.opinion(2) == 0;
    node0 += next.opinion(0) != 0;
    node3 += next.opinion(3) != 0;
  }
  CHECK(node2 == trials);
  // Node 0: neighbours 1 (pref) and 5 (opinion 1) -> alpha_1 * 1/2.
  CHECK(within_sigmas(node0, trials, 0.4 * 0.5) < 4.0);
  // Node 3: neighbours 2 and 4 both opinion 1 -> alpha_1.
  CHECK(within_sigmas(node3, trials, 0.4) < 4.0);
}

TEST_CASE("biased model rejects irregular graphs unless overridden") {
  const Graph star = generate_star(5);
  const OpinionState s(star, {0, 1, 1, 1, 1}, 2);
  Rng rng(7);
  try {
    biased_voter_round(star, s, BiasConfig({1.0, 0.5}), rng);
    FAIL("expected NonRegularGraph");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonRegularGraph);
  }
  CHECK_NOTHROW(biased_voter_round(star, s, BiasConfig({1.0, 0.5}), rng, true));
}

TEST_CASE("bias config validation") {
  CHECK_THROWS_AS(BiasConfig({0.9, 0.5}), Error);
  CHECK_THROWS_AS(BiasConfig({1.0, 1.0}), Error);
  CHECK_THROWS_AS(BiasConfig({1.0, 0.3, 0.5}), Error);
  CHECK(BiasConfig({1.0, 0.25}).epsilon() == doctest::Approx(0.75));
}

TEST_CASE("inconsistent state is rejected") {
  const Graph c6 = generate_cycle(6);
  const Graph c5 = generate_cycle(5);
  const OpinionState s(c6, {0, 1, 0, 1, 0, 1}, 2);
  Rng rng(8);
  CHECK_THROWS_AS(standard_voter_round(c5, s, rng), Error);
}

TEST_CASE("run_until_consensus: trivial and K_2") {
  Rng rng(9);
  const Graph one = build_graph(std::vector<Edge>{}, 1);
  StaticProvider p1(one, 1.0);
  CHECK(run_until_consensus(p1, OpinionState(one, {0}, 1), {}, rng).consensus_time == 0);
}

TEST_CASE("C_4 with four opinions: Monte Carlo mean matches the oracle") {
  const auto g = std::make_shared<const Graph>(generate_cycle(4));
  const double exact = exact_expected_consensus_time(*g, OpinionState::distinct(*g)).expected_absorption_time;
  StaticProvider provider(g);
  Rng rng(10);
  const int trials = 40'000;
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < trials; ++i) {
    const double t = static_cast<double>(*run_until_consensus(provider, OpinionState::distinct(*g), {}, rng).consensus_time);
    sum += t;
    sum_sq += t * t;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum_sq / trials - mean * mean) / trials);
  CHECK(std::abs(mean - exact) <= 4.0 * se);
}

TEST_CASE("threshold rounds are the first crossings") {
  const Graph g = generate_cycle(64);
  StaticProvider provider(g, 0.5);
  RunOptions opt;
  opt.max_rounds = 20;
  opt.thresholds = {0.25, 0.01, 0.1, 1.0};
  Rng rng(11);
  const auto trace = run_until_consensus(provider, OpinionState::distinct(g), opt, rng);
  CHECK(trace.max_rounds_exceeded);
  CHECK_FALSE(trace.consensus_time);
  // tau: t/2 >= 0.25 * 64 / 2; tau': t/4 >= 0.01 * 64 ln 64; tau'': t/2 >= 6.4; tau''': t/2 >= ln 64.
  CHECK(trace.thresholds.tau == 16);
  CHECK(trace.thresholds.tau_p == static_cast<std::size_t>(std::ceil(4 * 0.01 * 64 * std::log(64.0))));
  CHECK(trace.thresholds.tau_pp == 13);
  CHECK(trace.thresholds.tau_ppp == static_cast<std::size_t>(std::ceil(2 * std::log(64.0))));
}

TEST_CASE("static provider and degree mismatch") {
  StaticProvider p(generate_cycle(8));
  CHECK(p.phi() == doctest::Approx(0.25));
  const Graph& g = *p.graph();
  OpinionState s = OpinionState::distinct(g);
  CHECK(p.next(1, s, {}).graph == p.next(7, s, {}).graph);

  WrongDegreeProvider bad;
  Rng rng(12);
  const Graph c6 = generate_cycle(6);
  try {
    RunOptions opt;
    opt.max_rounds = 10'000;
    run_until_consensus(bad, OpinionState::distinct(c6), opt, rng);
    FAIL("expected ProviderDegreeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ProviderDegreeMismatch);
  }
}

TEST_CASE("volume conservation and absorption along recorded runs") {
  const Graph g = generate_random_regular(24, 3, 13);
  StaticProvider provider(g);
  RunOptions opt;
  opt.record_rows = true;
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const auto trace = run_until_consensus(provider, random_state(g, 3, rng), opt, rng);
    REQUIRE(trace.consensus_time);
    CHECK(trace.rows.size() == *trace.consensus_time + 1);
    for (const auto& row : trace.rows) {
      CHECK(std::accumulate(row.counts.begin(), row.counts.end(), std::size_t{0}) == 24);
      CHECK(row.psi * row.psi == doctest::Approx(static_cast<double>(row.vol_s)));
      CHECK(row.consensus == (row.t == *trace.consensus_time));
    }
  }
}

TEST_CASE("potential tracker") {
  PotentialTracker pt(2.0, 6.0, 100);
  CHECK(pt.psi == doctest::Approx(10.0));
  CHECK(pt.g_value == doctest::Approx(100.0 / 24.0));
  pt.update(81, 0.01);
  pt.update(64, 0.02);
  CHECK(pt.phi_cumsum == doctest::Approx(0.03));
  CHECK(pt.z_value == doctest::Approx(64.0 / 24.0 + 0.03));
  CHECK(pt.consistent());
}

TEST_CASE("trace outputs") {
  const Graph g = generate_cycle(4);
  StaticProvider provider(g);
  RunOptions opt;
  opt.record_rows = true;
  Rng rng(14);
  const auto trace = run_until_consensus(provider, OpinionState(g, {0, 0, 1, 1}, 2), opt, rng);
  std::ostringstream csv;
  write_trace_csv(csv, trace, 2);
  CHECK(csv.str().rfind("t,c0,c1,volS,psi,cut,phi,consensus\n0,2,2,4,2", 0) == 0);
  const auto json = nlohmann::json::parse(trace_summary_json(trace, 77));
  CHECK(json["seed"] == 77);
  CHECK(json["T"] == *trace.consensus_time);
  CHECK(json["thresholds"].contains("tau_pp"));
}

TEST_CASE("step decomposition on a hand-checked state") {
  // C_6 with preferred {0, 1, 2}: boundary of the rest {3, 5}, of S {0, 2}; all lambda = 1.
  const Graph g = generate_cycle(6);
  const OpinionState s(g, {0, 0, 0, 1, 1, 1}, 2);
  const auto sched = decompose_round_into_steps(g, s);
  REQUIRE(sched.steps.size() == 4);
  // Lambda <= Lambda' picks the rest side first: 3, then 0 (S side), then 5, then 2.
  CHECK(sched.steps[0].node == 3);
  CHECK(sched.steps[1].node == 0);
  CHECK(sched.steps[2].node == 5);
  CHECK(sched.steps[3].node == 2);
  CHECK(sched.lambda_sum.back() == 2);
  CHECK(sched.lambda_prime_sum.back() == 2);
  CHECK(sched.max_gap <= 2);
  CHECK(decompose_round_into_steps(g, OpinionState(g, std::vector<Opinion>(6, 1), 2)).steps.empty());
}

TEST_CASE("balance rule and interval bounds on biased runs") {
  Rng rng(15);
  const auto g = std::make_shared<const Graph>(generate_random_regular(64, 6, 15));
  StaticProvider provider(g, 0.2);
  RunOptions opt;
  opt.model = Model::Biased;
  opt.bias = BiasConfig({1.0, 0.5});
  opt.record_steps = true;
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Opinion> a(64, 1);
    for (Node u = 0; u < 16; ++u) a[rng.below(64)] = 0;
    const auto trace = run_until_consensus(provider, OpinionState(*g, a, 2), opt, rng);
    CHECK(trace.max_balance_gap <= 6);
    const auto rep_i = check_intervals(trace.steps, 6, 500, rng);
    CHECK(rep_i.length_violations == 0);
    CHECK(rep_i.prime_violations == 0);
    // Y recomputation: net preferred change per round equals gains minus losses.
    for (std::size_t r = 0; r + 1 < trace.steps.round_start.size(); ++r) {
      const auto i = trace.steps.round_start[r], j = trace.steps.round_start[r + 1];
      const auto delta = static_cast<std::int64_t>(trace.preferred_counts[r + 1]) -
                         static_cast<std::int64_t>(trace.preferred_counts[r]);
      CHECK(trace.steps.y(i, j) == delta);
    }
  }
}

TEST_CASE("good-sequence monitor flags a vanishing preferred opinion") {
  StepTrace trace;
  trace.initial_preferred = 1;
  StepSchedule round;
  round.steps.push_back({0, true, true, 2});
  round.lambda_sum.push_back(0);
  round.lambda_prime_sum.push_back(2);
  trace.append(round);
  trace.terminal = true;
  const auto rep = monitor_good_sequence(trace, BiasConfig({1.0, 0.5}), {8, 2, 8.0, std::nullopt, std::nullopt});
  CHECK(rep.violations_b >= 1);
  CHECK_FALSE(rep.a_holds);
  CHECK_FALSE(rep.clean());
}

TEST_CASE("good-sequence monitor: short non-terminal trace") {
  StepTrace trace;
  trace.initial_preferred = 3;
  try {
    monitor_good_sequence(trace, BiasConfig({1.0, 0.5}), {8, 2, 8.0, std::nullopt, std::nullopt});
    FAIL("expected TraceTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TraceTooShort);
  }
}

TEST_CASE("good-sequence constants") {
  CHECK(good_sequence_ell(100, 8.0, 0.5) == doctest::Approx(132.0 * 8.0 * std::log(100.0) / 0.25));
  CHECK(good_sequence_beta_prime(6, 0.5) == doctest::Approx(600.0 * 6 / (0.5 * 0.25)));
  CHECK(std::isinf(good_sequence_beta_prime(6, 0.0)));
}

TEST_CASE("checkpoint schedule") {
  const BiasConfig bias({1.0, 0.5});
  const double phi = 0.25;
  const auto cps = checkpoint_schedule(64, 4, bias, constant_schedule(phi), 100'000'000, 8.0, 3.0, 10.0);
  REQUIRE(cps.size() == 4 * 6 + 2);
  CHECK(cps.front().t == 0);
  CHECK(cps.front().zeta == 0.0);
  CHECK(cps.back().zeta == 64.0);
  for (const auto& c : cps) {
    // Static phi: tau(i) = ceil(2i / phi).
    if (c.j > 0) CHECK(c.t == static_cast<std::size_t>(std::ceil(2.0 * c.phase / phi - 1e-9)));
  }
  CHECK_THROWS_AS(checkpoint_schedule(64, 4, bias, constant_schedule(phi), 10, 8.0, 3.0, 10.0), Error);
}

TEST_CASE("raising alpha_1 does not speed up consensus (fixed seeds)") {
  const auto g = std::make_shared<const Graph>(generate_random_regular(64, 6, 16));
  StaticProvider provider(g, 0.2);
  auto median_time = [&](double alpha1) {
    RunOptions opt;
    opt.model = Model::Biased;
    opt.bias = BiasConfig({1.0, alpha1});
    std::vector<double> times;
    for (std::uint64_t i = 0; i < 400; ++i) {
      Rng rng = trial_rng(99, i);
      std::vector<Opinion> a(64, 1);
      for (Node u = 0; u < 8; ++u) a[u * 8] = 0;
      times.push_back(static_cast<double>(*run_until_consensus(provider, OpinionState(*g, a, 2), opt, rng).consensus_time));
    }
    std::nth_element(times.begin(), times.begin() + 200, times.end());
    return times[200];
  };
  const double low = median_time(0.1), high = median_time(0.7);
  CHECK(high >= low);
}
