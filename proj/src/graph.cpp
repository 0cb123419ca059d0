#include "voterlab/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "voterlab/errors.hpp"

namespace voterlab {

namespace {

std::string describe(const std::vector<Edge>& pairs, std::size_t limit = 8) {
  std::ostringstream os;
  for (std::size_t i = 0; i < pairs.size() && i < limit; ++i) {
    if (i) os << ", ";
    os << '(' << pairs[i].first << ',' << pairs[i].second << ')';
  }
  if (pairs.size() > limit) os << ", ... (" << pairs.size() << " total)";
  return os.str();
}

}  // namespace

bool Graph::has_edge(Node u, Node v) const noexcept {
  if (u >= node_count() || v >= node_count()) return false;
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

bool Graph::is_connected() const {
  const std::size_t n = node_count();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<Node> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    Node u = stack.back();
    stack.pop_back();
    for (Node w : neighbors(u)) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == n;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (Node u = 0; u < node_count(); ++u) {
    for (Node v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

Graph build_graph(std::span<const Edge> edges, std::size_t n, bool require_connected) {
  std::vector<Edge> loops;
  std::vector<Edge> out_of_range;
  std::vector<Edge> normalized;
  normalized.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) {
      out_of_range.emplace_back(u, v);
    } else if (u == v) {
      loops.emplace_back(u, v);
    } else {
      normalized.emplace_back(std::min(u, v), std::max(u, v));
    }
  }
  if (!out_of_range.empty()) {
    throw Error(ErrorCode::NodeOutOfRange, "n=" + std::to_string(n) + ": " + describe(out_of_range));
  }
  if (!loops.empty()) throw Error(ErrorCode::SelfLoop, describe(loops));

  std::sort(normalized.begin(), normalized.end());
  std::vector<Edge> duplicates;
  for (std::size_t i = 1; i < normalized.size(); ++i) {
    if (normalized[i] == normalized[i - 1]) duplicates.push_back(normalized[i]);
  }
  if (!duplicates.empty()) throw Error(ErrorCode::DuplicateEdge, describe(duplicates));

  Graph g;
  g.degrees_.assign(n, 0);
  for (auto [u, v] : normalized) {
    ++g.degrees_[u];
    ++g.degrees_[v];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) g.offsets_[u + 1] = g.offsets_[u] + g.degrees_[u];
  g.neighbors_.resize(2 * normalized.size());
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : normalized) {
    g.neighbors_[fill[u]++] = v;
    g.neighbors_[fill[v]++] = u;
  }
  for (std::size_t u = 0; u < n; ++u) {
    std::sort(g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u]),
              g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u + 1]));
  }
  if (n > 0) {
    auto [lo, hi] = std::minmax_element(g.degrees_.begin(), g.degrees_.end());
    g.min_degree_ = *lo;
    g.max_degree_ = *hi;
  }
  if (require_connected && !g.is_connected()) {
    throw Error(ErrorCode::Disconnected, "graph on " + std::to_string(n) + " nodes is not connected");
  }
  return g;
}

namespace {

std::vector<bool> membership(const Graph& g, std::span<const Node> s) {
  std::vector<bool> in_s(g.node_count(), false);
  for (Node u : s) {
    if (u >= g.node_count()) {
      throw Error(ErrorCode::NodeOutOfRange, "node " + std::to_string(u) + " not in graph");
    }
    in_s[u] = true;
  }
  return in_s;
}

}  // namespace

std::size_t cut_size(const Graph& g, const std::vector<bool>& in_s) {
  std::size_t cut = 0;
  for (Node u = 0; u < g.node_count(); ++u) {
    if (!in_s[u]) continue;
    for (Node w : g.neighbors(u)) cut += in_s[w] ? 0 : 1;
  }
  return cut;
}

std::uint64_t volume(const Graph& g, const std::vector<bool>& in_s) {
  std::uint64_t vol = 0;
  for (Node u = 0; u < g.node_count(); ++u) {
    if (in_s[u]) vol += g.degree(u);
  }
  return vol;
}

std::size_t cut_size(const Graph& g, std::span<const Node> s) { return cut_size(g, membership(g, s)); }

std::uint64_t volume(const Graph& g, std::span<const Node> s) { return volume(g, membership(g, s)); }

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.node_count() << ' ' << g.edge_count() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

std::string to_edge_list(const Graph& g) {
  std::ostringstream os;
  write_edge_list(os, g);
  return os.str();
}

Graph read_edge_list(std::istream& in, bool require_connected) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line()) throw Error(ErrorCode::ParseError, "empty edge list (missing \"n m\" header)");
  std::size_t n = 0;
  std::size_t m = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> n >> m)) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad header");
  }
  std::vector<Edge> edges;
  edges.reserve(m);
  while (next_line()) {
    std::istringstream ls(line);
    long long u = 0;
    long long v = 0;
    if (!(ls >> u >> v) || u < 0 || v < 0) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected \"u v\"");
    }
    edges.emplace_back(static_cast<Node>(u), static_cast<Node>(v));
  }
  if (edges.size() != m) {
    throw Error(ErrorCode::ParseError,
                "header declares " + std::to_string(m) + " edges, found " + std::to_string(edges.size()));
  }
  return build_graph(edges, n, require_connected);
}

}  // namespace voterlab
