#pragma once

#include <cstdint>
#include <vector>

#include "voterlab/graph.hpp"

namespace voterlab {

// C_n^k: node i adjacent to i±1, ..., i±k (mod n). Requires n > 2k >= 2.
Graph generate_circulant(std::size_t n, std::size_t k);

Graph generate_cycle(std::size_t n);
Graph generate_complete(std::size_t n);
Graph generate_star(std::size_t n);  // node 0 is the hub
Graph generate_path(std::size_t n);
Graph generate_petersen();

// Simple connected d-regular graph from the configuration model, rejecting
// pairings with loops or multi-edges; at most `max_attempts` pairings.
Graph generate_random_regular(std::size_t n, std::size_t d, std::uint64_t seed, int max_attempts = 1000);

struct CutGraph {
  Graph graph;
  std::vector<Node> side;   // S = {0, ..., n'-1}
  std::size_t k = 0;        // number of removed path edges + 1 on each side
  std::size_t cut = 0;      // |cut(S, V \ S)| = 2k - 2
  double target = 0.0;      // phi * d * n'
};

// Two circulants C_{n'}^{d/2} and C_{n-n'}^{d/2} joined by 2k-2 cross edges,
// k = ceil(phi * d * n') clamped to [2, ceil(n'/2) - 1]. Node ids 0..n'-1 form S.
// `gamma` bounds n' from below (n' >= gamma * n).
CutGraph generate_cut_graph(std::size_t n, std::size_t n_prime, std::size_t d, double phi,
                            double gamma = 0.125);

// A random d-regular base graph on n' nodes whose edges are each replaced by a
// path of length ell, padded with ell(d-2)/d extra nodes per path so that the
// result is d-regular. Requires ell mod d == 0, d >= 3.
Graph generate_subdivided_expander(std::size_t n_prime, std::size_t d, std::size_t ell, std::uint64_t seed);

// Same construction over a caller-supplied d-regular base graph.
Graph subdivide_regular(const Graph& base, std::size_t ell);

}  // namespace voterlab
