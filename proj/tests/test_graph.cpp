#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "voterlab/conductance.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/generators.hpp"
#include "voterlab/graph.hpp"
#include "voterlab/rng.hpp"

using namespace voterlab;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ParseError;
}

// Plain subset enumeration, independent of the Gray-code implementation.
double brute_conductance(const Graph& g) {
  const std::size_t n = g.node_count();
  const std::uint64_t m = g.edge_count();
  double best = 2.0;
  for (std::uint32_t s = 1; s + 1 < (1U << n); ++s) {
    std::uint64_t vol = 0, cut = 0;
    for (Node u = 0; u < n; ++u) {
      if (!((s >> u) & 1U)) continue;
      vol += g.degree(u);
      for (Node w : g.neighbors(u)) cut += !((s >> w) & 1U);
    }
    if (vol <= m) best = std::min(best, static_cast<double>(cut) / static_cast<double>(vol));
  }
  return best;
}

bool symmetric_simple(const Graph& g) {
  for (Node u = 0; u < g.node_count(); ++u) {
    auto nb = g.neighbors(u);
    if (!std::is_sorted(nb.begin(), nb.end())) return false;
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end()) return false;
    for (Node w : nb) {
      if (w == u || !g.has_edge(w, u)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("Philox4x32-10 known answer") {
  // Random123 KAT: counter 0, key 0 -> {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}.
  Rng rng(0, 0);
  CHECK(rng() == 0xe169c58d6627e8d5ULL);
  CHECK(rng() == 0x9b00dbd8bc57ac4cULL);
}

TEST_CASE("rng helpers") {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.below(7) < 7);
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK_FALSE(rng.bernoulli(0.0));
  CHECK(rng.bernoulli(1.0));
  Rng a = trial_rng(5, 3), b = Rng(5 ^ 3);
  CHECK(a() == b());
}

TEST_CASE("build_graph basics and errors") {
  const std::vector<Edge> k2{{0, 1}};
  const Graph g = build_graph(k2, 2);
  CHECK(g.node_count() == 2);
  CHECK(g.edge_count() == 1);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(1) == 1);

  const Graph c4 = build_graph(std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 4);
  CHECK(c4.edge_count() == 4);
  CHECK(c4.is_regular());
  CHECK(c4.min_degree() == 2);

  CHECK(code_of([] { build_graph(std::vector<Edge>{{0, 0}}, 1); }) == ErrorCode::SelfLoop);
  CHECK(code_of([] { build_graph(std::vector<Edge>{{0, 1}, {1, 0}}, 2); }) == ErrorCode::DuplicateEdge);
  CHECK(code_of([] { build_graph(std::vector<Edge>{{0, 5}}, 2); }) == ErrorCode::NodeOutOfRange);
  CHECK(code_of([] { build_graph(std::vector<Edge>{{0, 1}}, 3, true); }) == ErrorCode::Disconnected);
  CHECK_NOTHROW(build_graph(std::vector<Edge>{{0, 1}}, 3, false));
}

TEST_CASE("edge-list round trip") {
  const Graph g = generate_petersen();
  const std::string text = to_edge_list(g);
  CHECK(text.rfind("10 15\n", 0) == 0);
  std::istringstream in(text);
  CHECK(read_edge_list(in) == g);
}

TEST_CASE("circulant") {
  const Graph c8 = generate_circulant(8, 1);
  CHECK(c8 == generate_cycle(8));
  for (Node u = 0; u < 8; ++u) CHECK(c8.degree(u) == 2);
  const Graph c10 = generate_circulant(10, 2);
  const auto nb = c10.neighbors(0);
  CHECK(std::vector<Node>(nb.begin(), nb.end()) == std::vector<Node>{1, 2, 8, 9});
  CHECK(c10.is_regular());
  CHECK(code_of([] { generate_circulant(4, 2); }) == ErrorCode::InvalidParams);
}

TEST_CASE("random regular") {
  const Graph k4 = generate_random_regular(4, 3, 17);
  CHECK(k4 == generate_complete(4));
  const Graph a = generate_random_regular(100, 3, 5), b = generate_random_regular(100, 3, 5);
  CHECK(a == b);
  CHECK(a.is_regular());
  CHECK(a.is_connected());
  CHECK(symmetric_simple(a));
  CHECK(code_of([] { generate_random_regular(5, 3, 1); }) == ErrorCode::InfeasibleDegree);
}

TEST_CASE("cut graph (200, 100, 6, 0.01)") {
  const auto cg = generate_cut_graph(200, 100, 6, 0.01);
  CHECK(cg.k == 6);
  CHECK(cg.cut == 10);
  CHECK(cg.graph.edge_count() == 600);
  CHECK(cg.graph.is_regular());
  CHECK(cg.graph.max_degree() == 6);
  CHECK(cg.graph.is_connected());
  CHECK(symmetric_simple(cg.graph));
  // Count the cut directly.
  std::vector<bool> in_s(200, false);
  for (Node u : cg.side) in_s[u] = true;
  CHECK(cut_size(cg.graph, in_s) == 10);
  std::size_t untouched = 0;
  for (Node u : cg.side) {
    bool crosses = false;
    for (Node w : cg.graph.neighbors(u)) crosses = crosses || !in_s[w];
    untouched += !crosses;
  }
  CHECK(untouched >= 50);
  CHECK(code_of([] { generate_cut_graph(20, 10, 6, 1e-6); }) == ErrorCode::InfeasibleParams);
}

TEST_CASE("cut graph: cut within factor 4 of target across phi") {
  for (double phi : {0.005, 0.01, 0.02, 0.05}) {
    const auto cg = generate_cut_graph(400, 120, 8, phi);
    const double target = phi * 8 * 120;
    CHECK(cg.graph.is_regular());
    CHECK(static_cast<double>(cg.cut) >= target / 4.0);
    CHECK(static_cast<double>(cg.cut) <= 4.0 * target);
  }
}

TEST_CASE("subdivided K_4 has 22 nodes and is 3-regular") {
  const Graph g = subdivide_regular(generate_complete(4), 3);
  CHECK(g.node_count() == 22);
  CHECK(g.is_regular());
  CHECK(g.max_degree() == 3);
  CHECK(g.is_connected());
  CHECK(symmetric_simple(g));
  CHECK(code_of([] { generate_subdivided_expander(8, 3, 4, 1); }) == ErrorCode::InvalidParams);
  const Graph h = generate_subdivided_expander(12, 3, 6, 2);
  CHECK(h.node_count() == 12 + 18 * 7);
  CHECK(h.is_regular());
  // 10 + 15 * 7 nodes of degree 3: odd degree sum.
  CHECK(code_of([] { generate_subdivided_expander(10, 3, 6, 2); }) == ErrorCode::InvalidParams);
}

TEST_CASE("exact conductance examples") {
  auto r = conductance_exact(generate_cycle(8));
  CHECK(r.value == doctest::Approx(0.25));
  CHECK(volume(generate_cycle(8), r.witness_set) == 8);
  CHECK(conductance_exact(generate_complete(4)).value == doctest::Approx(2.0 / 3.0));
  CHECK(conductance_exact(generate_complete(2)).value == doctest::Approx(1.0));
  CHECK(code_of([] { conductance_exact(generate_cycle(27)); }) == ErrorCode::TooLargeForExact);
}

TEST_CASE("cycle conductance is 2/n for even n") {
  for (std::size_t n = 4; n <= 26; n += 2) {
    CHECK(conductance_exact(generate_cycle(n)).value * static_cast<double>(n) == doctest::Approx(2.0));
  }
}

TEST_CASE("exact conductance agrees with plain enumeration; Cheeger interval contains it") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const std::size_t n = 8 + 2 * seed;
    const Graph g = generate_random_regular(n, 3, seed);
    const auto exact = conductance_exact(g);
    CHECK(exact.value == doctest::Approx(brute_conductance(g)).epsilon(1e-12));
    const auto ch = conductance_cheeger_bounds(g);
    CHECK(ch.lower <= ch.upper);
    CHECK(ch.lower <= exact.value + 1e-9);
    CHECK(ch.upper >= exact.value - 1e-9);
    CHECK(exact.value >= 1.0 / static_cast<double>(n * n));
  }
  for (const Graph& g : {generate_cycle(8), generate_complete(4), generate_star(9), generate_petersen()}) {
    const auto exact = conductance_exact(g).value;
    const auto ch = conductance_cheeger_bounds(g);
    CHECK(ch.lower <= exact + 1e-9);
    CHECK(ch.upper >= exact - 1e-9);
  }
}

TEST_CASE("cut and volume identities") {
  const Graph c8 = generate_cycle(8);
  const std::vector<Node> arc{0, 1, 2, 3}, rest{4, 5, 6, 7}, none{}, all{0, 1, 2, 3, 4, 5, 6, 7};
  CHECK(cut_size(c8, arc) == 2);
  CHECK(volume(c8, arc) == 8);
  CHECK(cut_size(c8, none) == 0);
  CHECK(volume(c8, none) == 0);
  CHECK(cut_size(c8, all) == 0);
  CHECK(volume(c8, all) == 16);
  const Graph g = generate_random_regular(20, 4, 9);
  const std::vector<Node> s{0, 3, 5, 11, 17};
  std::vector<Node> cs;
  for (Node u = 0; u < 20; ++u) {
    if (std::find(s.begin(), s.end(), u) == s.end()) cs.push_back(u);
  }
  CHECK(cut_size(g, s) == cut_size(g, cs));
  CHECK(volume(g, s) + volume(g, cs) == 2 * g.edge_count());
  CHECK(code_of([&] { cut_size(c8, std::vector<Node>{9}); }) == ErrorCode::NodeOutOfRange);
}

TEST_CASE("generator families are simple and connected") {
  for (const Graph& g : {generate_star(6), generate_path(5), generate_complete(6), generate_petersen(),
                         generate_circulant(12, 3)}) {
    CHECK(symmetric_simple(g));
    CHECK(g.is_connected());
  }
  CHECK(generate_petersen().is_regular());
  CHECK(generate_star(6).degree(0) == 5);
}
