#include "voterlab/generators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "voterlab/errors.hpp"
#include "voterlab/rng.hpp"

namespace voterlab {

namespace {

std::string params(std::initializer_list<std::pair<const char*, double>> kv) {
  std::string s;
  for (auto [k, v] : kv) {
    if (!s.empty()) s += ", ";
    s += k;
    s += '=';
    auto iv = static_cast<long long>(v);
    s += (static_cast<double>(iv) == v) ? std::to_string(iv) : std::to_string(v);
  }
  return s;
}

// Adjacency sets kept as small sorted vectors while a generator is pairing stubs.
class EdgeSet {
 public:
  explicit EdgeSet(std::size_t n) : adj_(n) {}

  bool contains(Node u, Node v) const {
    const auto& a = adj_[u];
    return std::binary_search(a.begin(), a.end(), v);
  }
  bool add(Node u, Node v) {
    if (u == v || contains(u, v)) return false;
    adj_[u].insert(std::upper_bound(adj_[u].begin(), adj_[u].end(), v), v);
    adj_[v].insert(std::upper_bound(adj_[v].begin(), adj_[v].end(), u), u);
    edges_.emplace_back(u, v);
    return true;
  }
  std::size_t degree(Node u) const { return adj_[u].size(); }
  const std::vector<Edge>& edges() const { return edges_; }

 private:
  std::vector<std::vector<Node>> adj_;
  std::vector<Edge> edges_;
};

}  // namespace

Graph generate_circulant(std::size_t n, std::size_t k) {
  if (k < 1 || n <= 2 * k) {
    throw Error(ErrorCode::InvalidParams, "circulant needs n > 2k >= 2 (" + params({{"n", n}, {"k", k}}) + ")");
  }
  std::vector<Edge> edges;
  edges.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 1; j <= k; ++j) {
      edges.emplace_back(static_cast<Node>(i), static_cast<Node>((i + j) % n));
    }
  }
  return build_graph(edges, n);
}

Graph generate_cycle(std::size_t n) { return generate_circulant(n, 1); }

Graph generate_complete(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidParams, "complete graph needs n >= 1");
  std::vector<Edge> edges;
  for (Node u = 0; u < n; ++u) {
    for (Node v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  }
  return build_graph(edges, n);
}

Graph generate_star(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::InvalidParams, "star needs n >= 2");
  std::vector<Edge> edges;
  for (Node v = 1; v < n; ++v) edges.emplace_back(0, v);
  return build_graph(edges, n);
}

Graph generate_path(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidParams, "path needs n >= 1");
  std::vector<Edge> edges;
  for (Node v = 1; v < n; ++v) edges.emplace_back(v - 1, v);
  return build_graph(edges, n);
}

Graph generate_petersen() {
  std::vector<Edge> edges;
  for (Node i = 0; i < 5; ++i) {
    edges.emplace_back(i, (i + 1) % 5);
    edges.emplace_back(i, i + 5);
    edges.emplace_back(5 + i, 5 + (i + 2) % 5);
  }
  return build_graph(edges, 10);
}

Graph generate_random_regular(std::size_t n, std::size_t d, std::uint64_t seed, int max_attempts) {
  if (d >= n || (n * d) % 2 != 0 || d == 0) {
    throw Error(ErrorCode::InfeasibleDegree, params({{"n", n}, {"d", d}}));
  }
  Rng rng(seed, 0x7265677261706831ULL);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    // Stubs are paired one random pair at a time; a pair that would form a
    // loop or a multi-edge is redrawn. A pairing that gets stuck is restarted.
    std::vector<Node> stubs;
    stubs.reserve(n * d);
    for (Node u = 0; u < n; ++u) stubs.insert(stubs.end(), d, u);
    EdgeSet es(n);
    bool stuck = false;
    while (!stubs.empty() && !stuck) {
      const std::size_t remaining = stubs.size();
      bool placed = false;
      for (std::size_t tries = 0; tries < 50 * remaining + 100; ++tries) {
        auto i = static_cast<std::size_t>(rng.below(remaining));
        auto j = static_cast<std::size_t>(rng.below(remaining));
        if (i == j) continue;
        if (es.add(stubs[i], stubs[j])) {
          if (i < j) std::swap(i, j);
          stubs[i] = stubs.back();
          stubs.pop_back();
          stubs[j] = stubs.back();
          stubs.pop_back();
          placed = true;
          break;
        }
      }
      stuck = !placed;
    }
    if (stuck) continue;
    Graph g = build_graph(es.edges(), n);
    if (g.is_connected()) return g;
  }
  throw Error(ErrorCode::GenerationFailed,
              params({{"n", n}, {"d", d}}) + " after " + std::to_string(max_attempts) + " attempts");
}

CutGraph generate_cut_graph(std::size_t n, std::size_t n_prime, std::size_t d, double phi, double gamma) {
  if (d < 6 || d % 2 != 0) throw Error(ErrorCode::InfeasibleParams, "d must be even and >= 6, got " + std::to_string(d));
  if (!(phi >= 1.0 / (static_cast<double>(n) * static_cast<double>(d)) && phi <= 1.0)) {
    throw Error(ErrorCode::InfeasibleParams, "phi outside [1/(nd), 1]: " + params({{"phi", phi}}));
  }
  if (static_cast<double>(n_prime) < gamma * static_cast<double>(n) || 2 * n_prime > n) {
    throw Error(ErrorCode::InfeasibleParams, "n' outside [gamma n, n/2]: " + params({{"n", n}, {"n'", n_prime}}));
  }
  const std::size_t half = d / 2;
  if (n_prime <= d || n - n_prime <= d) {
    throw Error(ErrorCode::InfeasibleParams, "both sides need more than d nodes: " + params({{"n'", n_prime}, {"d", d}}));
  }
  const double target = phi * static_cast<double>(d) * static_cast<double>(n_prime);
  const auto k_max = static_cast<std::size_t>((n_prime + 1) / 2) - 1;  // largest k with k < n'/2
  auto k = static_cast<std::size_t>(std::ceil(target - 1e-12));
  k = std::clamp<std::size_t>(k, 2, std::max<std::size_t>(k_max, 2));
  const std::size_t cut = 2 * k - 2;
  if (k > k_max || static_cast<double>(cut) > 4.0 * target || 4.0 * static_cast<double>(cut) < target) {
    throw Error(ErrorCode::InfeasibleParams, "no k in [2, n'/2) puts the cut within a factor 4 of phi*d*n' (" +
                                                 params({{"target", target}, {"k", k}, {"n'", n_prime}}) + ")");
  }

  std::vector<Edge> edges;
  edges.reserve(n * d / 2);
  auto add_side = [&](Node offset, std::size_t size) {
    for (std::size_t i = 0; i < size; ++i) {
      for (std::size_t j = 1; j <= half; ++j) {
        if (j == 1 && i + 1 < k) continue;  // drop (v_i, v_{i+1}) for i < k
        edges.emplace_back(offset + static_cast<Node>(i), offset + static_cast<Node>((i + j) % size));
      }
    }
  };
  const auto second = static_cast<Node>(n_prime);
  add_side(0, n_prime);
  add_side(second, n - n_prime);

  // Deficient vertices in identifier order, with multiplicity: v_1 and v_k miss
  // one edge, v_2..v_{k-1} miss two. Pairing list' position j with list''
  // position j+1 (cyclically) avoids repeating a cross pair.
  std::vector<Node> deficient;
  deficient.push_back(0);
  for (Node i = 1; i + 1 < k; ++i) {
    deficient.push_back(i);
    deficient.push_back(i);
  }
  deficient.push_back(static_cast<Node>(k - 1));
  for (std::size_t j = 0; j < deficient.size(); ++j) {
    edges.emplace_back(deficient[j], second + deficient[(j + 1) % deficient.size()]);
  }

  CutGraph out;
  out.graph = build_graph(edges, n, true);
  out.side.resize(n_prime);
  for (Node i = 0; i < n_prime; ++i) out.side[i] = i;
  out.k = k;
  out.cut = cut;
  out.target = target;
  return out;
}

Graph subdivide_regular(const Graph& base, std::size_t ell) {
  if (!base.is_regular() || base.node_count() == 0) {
    throw Error(ErrorCode::InvalidParams, "base graph must be regular");
  }
  const std::size_t d = base.max_degree();
  if (d < 3 || ell == 0 || ell % d != 0) {
    throw Error(ErrorCode::InvalidParams, "need d >= 3 and ell mod d == 0 (" + params({{"d", d}, {"ell", ell}}) + ")");
  }
  const std::size_t extras = ell * (d - 2) / d;
  const auto base_edges = base.edges();
  const std::size_t per_path = (ell - 1) + extras;
  const std::size_t n = base.node_count() + base_edges.size() * per_path;
  if ((n * d) % 2 != 0) {
    throw Error(ErrorCode::InvalidParams, "subdivision has an odd degree sum (" + params({{"n", n}, {"d", d}}) + ")");
  }

  EdgeSet es(n);
  std::vector<std::size_t> deficit(n, 0);
  std::vector<Node> residual;  // stubs left for cross-path pairing, in path order
  Node next = static_cast<Node>(base.node_count());

  for (auto [u, v] : base_edges) {
    std::vector<Node> internal(ell - 1);
    for (auto& p : internal) p = next++;
    std::vector<Node> pad(extras);
    for (auto& x : pad) x = next++;

    Node prev = u;
    for (Node p : internal) {
      es.add(prev, p);
      prev = p;
    }
    es.add(prev, v);
    for (Node p : internal) deficit[p] = d - 2;
    for (Node x : pad) deficit[x] = d;

    // Each padding node takes distinct internal neighbours in path order,
    // resuming where the previous padding node stopped.
    std::size_t cursor = 0;
    for (Node x : pad) {
      for (std::size_t scanned = 0; scanned < internal.size() && deficit[x] > 0; ++scanned) {
        Node p = internal[cursor];
        cursor = (cursor + 1) % internal.size();
        if (deficit[p] > 0 && es.add(x, p)) {
          --deficit[p];
          --deficit[x];
        }
      }
    }
    for (std::size_t a = 0; a < pad.size(); ++a) {
      for (std::size_t b = a + 1; b < pad.size() && deficit[pad[a]] > 0; ++b) {
        if (deficit[pad[b]] > 0 && es.add(pad[a], pad[b])) {
          --deficit[pad[a]];
          --deficit[pad[b]];
        }
      }
    }
    for (Node p : internal) residual.insert(residual.end(), deficit[p], p);
    for (Node x : pad) residual.insert(residual.end(), deficit[x], x);
  }

  // Leftover stubs are joined to the nearest later stub (in path order) that
  // forms a new simple edge.
  std::vector<char> used(residual.size(), 0);
  for (std::size_t i = 0; i < residual.size(); ++i) {
    if (used[i]) continue;
    bool matched = false;
    for (std::size_t j = i + 1; j < residual.size(); ++j) {
      if (!used[j] && es.add(residual[i], residual[j])) {
        used[i] = used[j] = 1;
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw Error(ErrorCode::GenerationFailed, "could not pad subdivided paths to degree " + std::to_string(d));
    }
  }
  Graph g = build_graph(es.edges(), n, true);
  if (!g.is_regular() || g.max_degree() != d) {
    throw Error(ErrorCode::GenerationFailed, "subdivision is not " + std::to_string(d) + "-regular");
  }
  return g;
}

Graph generate_subdivided_expander(std::size_t n_prime, std::size_t d, std::size_t ell, std::uint64_t seed) {
  if (d < 3 || ell == 0 || ell % d != 0) {
    throw Error(ErrorCode::InvalidParams, "need d >= 3 and ell mod d == 0 (" + params({{"d", d}, {"ell", ell}}) + ")");
  }
  return subdivide_regular(generate_random_regular(n_prime, d, seed), ell);
}

}  // namespace voterlab
