#include "voterlab/coalescing.hpp"

#include <algorithm>

#include "voterlab/errors.hpp"

namespace voterlab {

namespace {

Node lazy_step(const Graph& g, Node u, Rng& rng) {
  const auto nbrs = g.neighbors(u);
  const std::uint64_t r = rng.below(2 * nbrs.size());
  return r < nbrs.size() ? nbrs[r] : u;
}

void step_in_place(const Graph& g, std::vector<Node>& pos, Rng& rng) {
  for (auto& p : pos) p = lazy_step(g, p, rng);
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
}

}  // namespace

PebbleSet PebbleSet::everywhere(const Graph& g) {
  PebbleSet p;
  p.positions.resize(g.node_count());
  for (Node u = 0; u < p.positions.size(); ++u) p.positions[u] = u;
  return p;
}

PebbleSet coalescing_round(const Graph& g, const PebbleSet& pebbles, Rng& rng) {
  for (Node p : pebbles.positions) {
    if (p >= g.node_count()) throw Error(ErrorCode::NodeOutOfRange, "pebble at " + std::to_string(p));
  }
  PebbleSet next = pebbles;
  step_in_place(g, next.positions, rng);
  return next;
}

std::optional<std::size_t> coalescing_time(const Graph& g, Rng& rng, std::size_t max_rounds) {
  std::vector<Node> pos = PebbleSet::everywhere(g).positions;
  for (std::size_t t = 0;; ++t) {
    if (pos.size() <= 1) return t;
    if (t == max_rounds) return std::nullopt;
    step_in_place(g, pos, rng);
  }
}

std::optional<std::size_t> meeting_time(const Graph& g, Node u, Node v, Rng& rng, std::size_t max_rounds) {
  if (u >= g.node_count() || v >= g.node_count()) throw Error(ErrorCode::NodeOutOfRange, "walk start");
  for (std::size_t t = 0;; ++t) {
    if (u == v) return t;
    if (t == max_rounds) return std::nullopt;
    u = lazy_step(g, u, rng);
    v = lazy_step(g, v, rng);
  }
}

}  // namespace voterlab
