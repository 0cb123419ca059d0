#include <doctest.h>

#include <cmath>
#include <numeric>

#include "voterlab/adversary.hpp"
#include "voterlab/dynamics.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/generators.hpp"
#include "voterlab/stats.hpp"

using namespace voterlab;

namespace {

double k2_consensus_time(std::size_t, Rng& rng) {
  static const auto g = std::make_shared<const Graph>(generate_complete(2));
  StaticProvider provider(g, 1.0);
  RunOptions opt;
  const auto trace = run_until_consensus(provider, OpinionState(*g, {0, 1}, 2), opt, rng);
  return static_cast<double>(*trace.consensus_time);
}

}  // namespace

TEST_CASE("estimate on a small sample") {
  const std::vector<double> x{5, 1, 4, 2, 3};
  const auto e = estimate(x, 0.95);
  CHECK(e.mean == doctest::Approx(3.0));
  CHECK(e.median == 3.0);
  CHECK(e.variance == doctest::Approx(2.5));
  CHECK(e.mean_ci.lo == doctest::Approx(3.0 - 1.959964 * std::sqrt(0.5)).epsilon(1e-6));
  CHECK(e.median_ci.lo <= e.median);
  CHECK(e.median_ci.hi >= e.median);
}

TEST_CASE("K_2 discordant: mean consensus time near 2") {
  const auto e = run_trials(100'000, 11, 1, k2_consensus_time);
  CHECK(e.mean >= 1.94);
  CHECK(e.mean <= 2.06);
  CHECK(e.trials == 100'000);
}

TEST_CASE("run_trials is deterministic and thread-count independent") {
  const auto a = collect_trials(500, 99, 1, k2_consensus_time);
  const auto b = collect_trials(500, 99, 3, k2_consensus_time);
  CHECK(a == b);
  const auto e1 = run_trials(500, 99, 2, k2_consensus_time);
  const auto e2 = run_trials(500, 99, 2, k2_consensus_time);
  CHECK(e1.mean == e2.mean);
  CHECK(e1.median_ci.hi == e2.median_ci.hi);
}

TEST_CASE("too few trials") {
  try {
    run_trials(10, 1, 1, k2_consensus_time);
    FAIL("expected TooFewTrials");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewTrials);
  }
}

TEST_CASE("trial exceptions propagate") {
  CHECK_THROWS_AS(collect_trials(200, 1, 2, [](std::size_t i, Rng&) -> double {
                    if (i == 150) throw Error(ErrorCode::InvalidParams, "boom");
                    return 0.0;
                  }),
                  Error);
}

TEST_CASE("scaling fit calibration") {
  const std::vector<double> n{32, 64, 128, 256};
  std::vector<double> sq;
  for (double x : n) sq.push_back(x * x);
  const auto fit = fit_scaling(n, sq);
  CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.stderr_exponent < 1e-9);

  const std::vector<double> flat{7, 7, 7, 7};
  CHECK(std::abs(fit_scaling(n, flat).exponent) < 1e-12);

  const std::vector<double> three{32, 64, 256};
  CHECK_THROWS_AS(fit_scaling(three, std::vector<double>{1, 2, 3}), Error);
  const std::vector<double> narrow{32, 40, 48, 64};
  CHECK_THROWS_AS(fit_scaling(narrow, flat), Error);
}

TEST_CASE("two-sample KS") {
  std::vector<double> a(100), b(100);
  std::iota(a.begin(), a.end(), 0.0);
  std::iota(b.begin(), b.end(), 10.0);
  auto r = ks_two_sample(a, b);
  CHECK(r.statistic == doctest::Approx(0.1));
  CHECK(r.p_value == doctest::Approx(0.676620149700246).epsilon(1e-9));  // scipy kstwobign.sf

  r = ks_two_sample({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14});
  CHECK(r.statistic == doctest::Approx(1.0 / 3.0));
  CHECK(ks_two_sample(a, a).p_value == 1.0);
}

TEST_CASE("binomial helpers") {
  CHECK(binomial_cdf(5, 10, 0.5) == doctest::Approx(638.0 / 1024.0).epsilon(1e-12));
  CHECK(binomial_cdf(10, 10, 0.3) == 1.0);
  CHECK(binomial_lower_p_value(0, 3, 0.5) == doctest::Approx(0.125));
}

TEST_CASE("Chernoff bound values") {
  CHECK(chernoff_upper_bound(50, 0.5) == doctest::Approx(4.4716e-3).epsilon(1e-3));
  CHECK(chernoff_lower_bound(50, 0.5) == doctest::Approx(std::exp(-6.25)));
  CHECK(chernoff_upper_bound(50, 0.0) == 1.0);
}

TEST_CASE("dependent Chernoff: iid and prefix-adaptive families") {
  std::vector<std::unique_ptr<SequenceGenerator>> gens;
  gens.push_back(iid_generator());
  gens.push_back(momentum_generator());
  gens.push_back(contrarian_generator());
  for (const auto& gen : gens) {
    for (auto part : {ChernoffPart::Upper, ChernoffPart::Lower}) {
      const auto r = dependent_chernoff_check(*gen, part, 50, 0.5, 20'000, 5, 1);
      CHECK_MESSAGE(r.pass, gen->name() << " empirical " << r.empirical << " bound " << r.bound);
      if (part == ChernoffPart::Upper) CHECK(r.max_b_total <= 50.0 + 1e-9);
      if (part == ChernoffPart::Lower) CHECK(r.min_b_total >= 50.0 - 1e-9);
    }
  }
}

TEST_CASE("dependent Chernoff: voter step families") {
  const auto g = std::make_shared<const Graph>(generate_circulant(16, 2));
  std::vector<Opinion> init(16, 1);
  for (Node u = 0; u < 8; ++u) init[u] = 0;
  std::vector<std::unique_ptr<SequenceGenerator>> gens;
  gens.push_back(voter_gain_generator(g, init, 0.5));
  gens.push_back(voter_loss_generator(g, init, 0.5));
  for (const auto& gen : gens) {
    for (auto part : {ChernoffPart::Upper, ChernoffPart::Lower}) {
      const auto r = dependent_chernoff_check(*gen, part, 20, 0.5, 5'000, 8, 1);
      CHECK_MESSAGE(r.pass, gen->name() << " empirical " << r.empirical << " bound " << r.bound);
      CHECK(r.max_b_total <= (part == ChernoffPart::Upper ? 20.0 + 1e-9 : 1e9));
    }
  }
  // delta = 0 gives the trivial bound.
  CHECK(dependent_chernoff_check(*iid_generator(), ChernoffPart::Upper, 10, 0.0, 200, 1, 1).pass);
}

TEST_CASE("submartingale increment on a consensus state is phi") {
  const Graph g = generate_cycle(8);
  Rng rng(3);
  const auto s = submartingale_check(g, OpinionState(g, std::vector<Opinion>(8, 0), 2), 0.01, 1.0, 100, rng);
  CHECK(s.mean == doctest::Approx(0.01));
  CHECK(s.se == doctest::Approx(0.0));
  CHECK(s.pass);
}

TEST_CASE("submartingale increment: conditional mean matches exact convolution") {
  // Away from balance the min() never folds, so E[vol'] = vol and the mean increment is phi.
  const Graph g = generate_circulant(30, 3);
  std::vector<Opinion> a(30, 1);
  for (Node u = 0; u < 5; ++u) a[u] = 0;
  Rng rng(4);
  const auto s = submartingale_check(g, OpinionState(g, a, 2), 0.05, 1.0, 20'000, rng);
  CHECK(std::abs(s.mean - 0.05) <= 4.0 * s.se);
}
