#include <doctest.h>

#include <cmath>

#include "voterlab/adversary.hpp"
#include "voterlab/coalescing.hpp"
#include "voterlab/dynamics.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/generators.hpp"

using namespace voterlab;

TEST_CASE("single pebble stays single") {
  const Graph g = generate_cycle(7);
  Rng rng(1);
  PebbleSet p{{3}};
  for (int i = 0; i < 100; ++i) {
    p = coalescing_round(g, p, rng);
    CHECK(p.alive_count() == 1);
  }
}

TEST_CASE("K_2: two pebbles merge w.p. 1/2 per round") {
  const Graph g = generate_complete(2);
  Rng rng(2);
  const int trials = 100'000;
  double merged = 0;
  for (int i = 0; i < trials; ++i) merged += coalescing_round(g, PebbleSet::everywhere(g), rng).alive_count() == 1;
  CHECK(std::abs(merged / trials - 0.5) <= 4.0 * std::sqrt(0.25 / trials));
}

TEST_CASE("pebble count never increases") {
  const Graph g = generate_random_regular(30, 3, 3);
  Rng rng(3);
  PebbleSet p = PebbleSet::everywhere(g);
  while (p.alive_count() > 1) {
    const auto next = coalescing_round(g, p, rng);
    CHECK(next.alive_count() <= p.alive_count());
    p = next;
  }
}

TEST_CASE("trivial times and range checks") {
  const Graph one = build_graph(std::vector<Edge>{}, 1);
  Rng rng(4);
  CHECK(coalescing_time(one, rng) == 0);
  const Graph c6 = generate_cycle(6);
  CHECK(meeting_time(c6, 2, 2, rng) == 0);
  CHECK_THROWS_AS(meeting_time(c6, 0, 6, rng), Error);
  CHECK_THROWS_AS(coalescing_round(c6, PebbleSet{{9}}, rng), Error);
  CHECK_FALSE(coalescing_time(generate_cycle(64), rng, 3).has_value());
}

TEST_CASE("duality on C_8: coalescing and consensus means agree") {
  const auto g = std::make_shared<const Graph>(generate_cycle(8));
  StaticProvider provider(g);
  const int trials = 20'000;
  double s1 = 0, q1 = 0, s2 = 0, q2 = 0;
  for (int i = 0; i < trials; ++i) {
    Rng a = trial_rng(5, i), b = trial_rng(6, i);
    const double c = static_cast<double>(*coalescing_time(*g, a));
    const double v = static_cast<double>(*run_until_consensus(provider, OpinionState::distinct(*g), {}, b).consensus_time);
    s1 += c, q1 += c * c, s2 += v, q2 += v * v;
  }
  const double m1 = s1 / trials, m2 = s2 / trials;
  const double se = std::sqrt((q1 / trials - m1 * m1) / trials + (q2 / trials - m2 * m2) / trials);
  CHECK(std::abs(m1 - m2) <= 4.0 * se);
}
