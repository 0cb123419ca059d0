#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "voterlab/graph.hpp"
#include "voterlab/rng.hpp"

namespace voterlab {

// Distinct pebble locations, kept sorted; co-located pebbles are merged.
struct PebbleSet {
  std::vector<Node> positions;

  static PebbleSet everywhere(const Graph& g);
  std::size_t alive_count() const noexcept { return positions.size(); }
};

// Every pebble, in increasing position order, draws r < 2d and moves to
// neighbour r when r < d (so it stays put with probability 1/2); then
// co-located pebbles merge.
PebbleSet coalescing_round(const Graph& g, const PebbleSet& pebbles, Rng& rng);

// Rounds until one pebble remains, starting with a pebble on every node;
// nullopt if max_rounds pass first.
std::optional<std::size_t> coalescing_time(const Graph& g, Rng& rng, std::size_t max_rounds = 100'000'000);

// Rounds until two independent lazy walks started at u and v share a node.
std::optional<std::size_t> meeting_time(const Graph& g, Node u, Node v, Rng& rng,
                                        std::size_t max_rounds = 100'000'000);

}  // namespace voterlab
