#include <doctest.h>

#include <bit>
#include <cmath>
#include <map>

#include "voterlab/errors.hpp"
#include "voterlab/generators.hpp"
#include "voterlab/oracle.hpp"

using namespace voterlab;

namespace {

OpinionState binary(const Graph& g, std::vector<Opinion> a) { return OpinionState(g, std::move(a), 2); }

// Independent reference: enumerate all 2^n joint outcomes of one lazy round.
std::map<std::uint64_t, double> brute_force_volume_law(const Graph& g, const std::vector<Opinion>& a) {
  const std::size_t n = g.node_count();
  std::map<std::uint64_t, double> law;
  for (std::uint32_t flips = 0; flips < (1U << n); ++flips) {
    double p = 1.0;
    std::uint64_t vol = 0;
    for (Node u = 0; u < n; ++u) {
      std::size_t lam = 0;
      for (Node w : g.neighbors(u)) lam += a[w] != a[u];
      const double q = static_cast<double>(lam) / (2.0 * g.degree(u));
      const bool f = (flips >> u) & 1U;
      p *= f ? q : 1.0 - q;
      const Opinion o = f ? 1 - a[u] : a[u];
      if (o == 0) vol += g.degree(u);
    }
    if (p > 0) law[vol] += p;
  }
  return law;
}

}  // namespace

TEST_CASE("fixation on C_4 with one holder is 1/4") {
  const Graph g = generate_cycle(4);
  const auto sol = exact_fixation_probability(g, binary(g, {0, 1, 1, 1}));
  CHECK(sol.rational);
  CHECK(sol.probability_exact == "1/4");
  CHECK(sol.absorption_probabilities[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(sol.absorption_probabilities[0] + sol.absorption_probabilities[1] == doctest::Approx(1.0));
}

TEST_CASE("fixation from consensus is certain") {
  const Graph g = generate_cycle(5);
  CHECK(exact_fixation_probability(g, binary(g, {0, 0, 0, 0, 0})).absorption_probabilities[0] == 1.0);
  CHECK(exact_fixation_probability(g, binary(g, {1, 1, 1, 1, 1})).absorption_probabilities[0] == 0.0);
}

TEST_CASE("fixation is degree proportional on the star") {
  // Hub holds opinion 0: vol = 4 out of 8.
  const Graph g = generate_star(5);
  const auto t = fixation_table(g);
  CHECK(t.prevail[0b00001] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.prevail[0b00010] == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("regular graphs give k/n, floating solver for n > 8") {
  for (const Graph& g : {generate_cycle(10), generate_petersen(), generate_random_regular(12, 3, 7)}) {
    const auto t = fixation_table(g);
    CHECK_FALSE(t.rational);
    CHECK(t.residual <= 1e-10);
    const std::size_t n = g.node_count();
    for (std::uint32_t s = 0; s < t.prevail.size(); s += 37) {
      CHECK(std::abs(t.prevail[s] - std::popcount(s) / static_cast<double>(n)) <= 1e-10);
    }
  }
}

TEST_CASE("fixation oracle size limits") {
  const Graph g = generate_cycle(15);
  CHECK_THROWS_AS(fixation_table(g), Error);
  const Graph k4 = generate_complete(4);
  CHECK_THROWS_AS(exact_fixation_probability(k4, OpinionState::distinct(k4)), Error);
}

TEST_CASE("consensus time: K_2 discordant is 2, consensus is 0") {
  const Graph k2 = generate_complete(2);
  auto sol = exact_expected_consensus_time(k2, binary(k2, {0, 1}));
  CHECK(sol.rational);
  CHECK(sol.time_exact == "2");
  const Graph c6 = generate_cycle(6);
  CHECK(exact_expected_consensus_time(c6, binary(c6, {1, 1, 1, 1, 1, 1})).expected_absorption_time == 0.0);
}

TEST_CASE("consensus time agrees with the two-opinion fixation chain") {
  const Graph g = generate_cycle(6);
  const auto table = fixation_table(g);
  const std::vector<Opinion> a{0, 0, 1, 0, 1, 1};
  const auto sol = exact_expected_consensus_time(g, binary(g, a));
  CHECK(sol.expected_absorption_time == doctest::Approx(table.time[0b001011]).epsilon(1e-12));
}

TEST_CASE("C_6 distinct opinions: pinned E[T]") {
  const Graph g = generate_cycle(6);
  const auto sol = exact_expected_consensus_time(g, OpinionState::distinct(g));
  CHECK(sol.rational);
  // Regression constant produced by the rational solve.
  CHECK(sol.time_exact == "1249640236639058/82528579687141");
  CHECK(sol.expected_absorption_time == doctest::Approx(15.14192).epsilon(1e-6));
}

TEST_CASE("one-step distribution matches brute-force enumeration") {
  const Graph g = generate_petersen();
  const std::vector<Opinion> a{0, 1, 1, 0, 1, 0, 0, 1, 1, 0};
  const auto dist = exact_one_step_distribution(g, binary(g, a));
  const auto law = brute_force_volume_law(g, a);
  double total = 0.0;
  for (std::size_t v = 0; v < dist.pmf.size(); ++v) {
    const double ref = law.count(v) ? law.at(v) : 0.0;
    CHECK(dist.pmf[v] == doctest::Approx(ref).epsilon(1e-12));
    total += dist.pmf[v];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(dist.expected_volume - static_cast<double>(dist.current_volume)) <= 1e-12);
}

TEST_CASE("one-step distribution: empty boundary is a point mass") {
  const Graph g = generate_cycle(5);
  const auto dist = exact_one_step_distribution(g, binary(g, {0, 0, 0, 0, 0}));
  CHECK(dist.pmf[10] == 1.0);
  CHECK(dist.expected_psi_next == 0.0);
}

TEST_CASE("C_4 adjacent pair: drift bound 1.984375") {
  const Graph g = generate_cycle(4);
  const auto cert = verify_drift_upper(g, binary(g, {0, 0, 1, 1}));
  CHECK(cert.psi == doctest::Approx(2.0));
  CHECK(cert.bound_upper == doctest::Approx(1.984375).epsilon(1e-15));
  // Reference: the 4 boundary nodes each flip w.p. 1/4; volume of opinion 0
  // is 4 + 2(#flips among {2,3}) - 2(#flips among {0,1}).
  double ref = 0.0;
  for (std::uint32_t f = 0; f < 16; ++f) {
    double p = 1.0;
    for (int i = 0; i < 4; ++i) p *= ((f >> i) & 1U) ? 0.25 : 0.75;
    const int vol = 4 - 2 * (int(f & 1U) + int((f >> 1) & 1U)) + 2 * (int((f >> 2) & 1U) + int((f >> 3) & 1U));
    ref += p * std::sqrt(std::min(vol, 8 - vol));
  }
  CHECK(cert.exact_expected_psi_next == doctest::Approx(ref).epsilon(1e-14));
  CHECK(cert.satisfied);
}

TEST_CASE("drift upper sweeps: C_6, K_5, Petersen") {
  for (const Graph& g : {generate_cycle(6), generate_complete(5), generate_petersen()}) {
    const std::size_t n = g.node_count();
    std::size_t violations = 0;
    for (std::uint32_t s = 1; s + 1 < (1U << n); ++s) {
      std::vector<Opinion> a(n);
      for (Node u = 0; u < n; ++u) a[u] = ((s >> u) & 1U) ? 0 : 1;
      if (!verify_drift_upper(g, binary(g, a)).satisfied) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("drift checks reject bad preconditions") {
  const Graph g = generate_cycle(6);
  CHECK_THROWS_AS(verify_drift_upper(g, binary(g, {0, 0, 0, 0, 0, 0})), Error);
  try {
    verify_drift_lower(g, binary(g, {0, 1, 0, 1, 0, 1}), 1.0, 0.01);
    FAIL("expected PreconditionCutTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PreconditionCutTooLarge);
  }
  const Graph star = generate_star(5);
  CHECK_THROWS_AS(verify_drift_lower(star, binary(star, {0, 1, 1, 1, 1}), 1.0, 1.0), Error);
}

TEST_CASE("drift lower bound is trivially satisfied when vacuous") {
  const Graph g = generate_cycle(6);
  const auto cert = verify_drift_lower(g, binary(g, {0, 0, 0, 1, 1, 1}), 10.0, 0.5);
  REQUIRE(cert.bound_lower);
  CHECK(*cert.bound_lower <= 0.0);
  CHECK(cert.satisfied);
}

TEST_CASE("certificate json has the audit fields") {
  const Graph g = generate_cycle(4);
  const auto j = certificate_json(verify_drift_upper(g, binary(g, {0, 0, 1, 1})));
  CHECK(j.find("\"state_bits\":\"0011\"") != std::string::npos);
  CHECK(j.find("\"satisfied\":true") != std::string::npos);
}

TEST_CASE("third moment identity") {
  const Law coin{{-1.0, 0.5}, {1.0, 0.5}};
  auto r = third_moment_identity({coin, coin});
  CHECK(r.brute_force == 0.0);
  CHECK(r.formula == 0.0);

  // Skewed but centered laws, reference computed by hand: E[Z^3] of a sum of
  // independent centered variables is the sum of third moments.
  const Law a{{2.0, 0.25}, {-2.0 / 3.0, 0.75}};
  const Law b{{-1.0, 0.5}, {1.0, 0.5}};
  r = third_moment_identity({a, b});
  const double third_a = 0.25 * 8.0 + 0.75 * (-8.0 / 27.0);
  CHECK(r.brute_force == doctest::Approx(third_a).epsilon(1e-12));
  CHECK(r.max_abs_deviation <= 1e-12);

  CHECK_THROWS_AS(third_moment_identity({Law{{1.0, 1.0}}}), Error);
}

TEST_CASE("Y laws on C_4 adjacent pair satisfy the identity") {
  const Graph g = generate_cycle(4);
  const auto laws = dominance_laws(g, binary(g, {0, 0, 1, 1}));
  CHECK(laws.y.size() == 4);
  const auto r = third_moment_identity(laws.y);
  CHECK(r.atoms == 16);
  CHECK(r.max_abs_deviation <= 1e-12);
}

TEST_CASE("support limit") {
  std::vector<Law> big(20, Law{{-1.0, 0.5}, {1.0, 0.5}});
  try {
    third_moment_identity(big);
    FAIL("expected SupportTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SupportTooLarge);
  }
}

TEST_CASE("concave dominance on C_4 arc") {
  const Graph g = generate_cycle(4);
  const auto laws = dominance_laws(g, binary(g, {0, 0, 1, 1}));
  const auto rep = concave_dominance_check(laws.x, laws.y,
                                           {sqrt_shift(laws.minority_volume), neg_square(), min_cap(2.0),
                                            linear(1.0), square()});
  REQUIRE(rep.results.size() == 5);
  CHECK(rep.results[0].concave_on_support);
  CHECK(rep.results[0].holds);
  CHECK(rep.results[3].ex == doctest::Approx(rep.results[3].ey).epsilon(1e-14));
  CHECK_FALSE(rep.results[4].concave_on_support);
  CHECK(rep.all_hold());
}
