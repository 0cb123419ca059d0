#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace voterlab {

using Node = std::uint32_t;
using Edge = std::pair<Node, Node>;

// Simple undirected graph in compressed adjacency form. Neighbor lists are
// sorted; the graph is immutable once built and safe to share across trials.
class Graph {
 public:
  Graph() = default;

  std::size_t node_count() const noexcept { return degrees_.size(); }
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }

  std::span<const Node> neighbors(Node u) const noexcept {
    return {neighbors_.data() + offsets_[u], neighbors_.data() + offsets_[u + 1]};
  }
  std::uint32_t degree(Node u) const noexcept { return degrees_[u]; }
  std::span<const std::uint32_t> degrees() const noexcept { return degrees_; }

  std::uint32_t min_degree() const noexcept { return min_degree_; }
  std::uint32_t max_degree() const noexcept { return max_degree_; }
  bool is_regular() const noexcept { return min_degree_ == max_degree_; }
  bool has_edge(Node u, Node v) const noexcept;
  bool is_connected() const;

  // Edges with u < v in lexicographic order.
  std::vector<Edge> edges() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.offsets_ == b.offsets_ && a.neighbors_ == b.neighbors_;
  }

 private:
  friend Graph build_graph(std::span<const Edge>, std::size_t, bool);

  std::vector<std::size_t> offsets_{0};
  std::vector<Node> neighbors_;
  std::vector<std::uint32_t> degrees_;
  std::uint32_t min_degree_ = 0;
  std::uint32_t max_degree_ = 0;
};

// Validates and builds a graph. Throws Error with SelfLoop, DuplicateEdge or
// NodeOutOfRange listing the offending pairs; Disconnected only when
// require_connected is set.
Graph build_graph(std::span<const Edge> edges, std::size_t n, bool require_connected = false);

// |cut(s, V \ s)| and vol(s). `s` is a list of distinct nodes.
std::size_t cut_size(const Graph& g, std::span<const Node> s);
std::uint64_t volume(const Graph& g, std::span<const Node> s);

// Membership-mask variants used on hot paths.
std::size_t cut_size(const Graph& g, const std::vector<bool>& in_s);
std::uint64_t volume(const Graph& g, const std::vector<bool>& in_s);

// Edge-list text format: header "n m", then one "u v" line per edge, u < v,
// lexicographic order.
void write_edge_list(std::ostream& out, const Graph& g);
std::string to_edge_list(const Graph& g);
Graph read_edge_list(std::istream& in, bool require_connected = false);

}  // namespace voterlab
