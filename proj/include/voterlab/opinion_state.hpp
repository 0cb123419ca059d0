#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "voterlab/graph.hpp"

namespace voterlab {

using Opinion = std::uint32_t;

// Popularities alpha_i of the biased voter model; opinion 0 is preferred.
class BiasConfig {
 public:
  BiasConfig() = default;
  // Validates alpha_0 = 1 > alpha_1 >= alpha_2 >= ... >= 0.
  explicit BiasConfig(std::vector<double> alphas);

  double alpha(Opinion i) const { return alphas_[i]; }
  std::span<const double> alphas() const { return alphas_; }
  std::size_t kappa() const { return alphas_.size(); }
  double alpha1() const { return alphas_.size() > 1 ? alphas_[1] : 0.0; }
  double epsilon() const { return 1.0 - alpha1(); }

 private:
  std::vector<double> alphas_{1.0, 0.0};
};

// Opinion assignment with cached per-opinion counts and volumes, and per-node
// discordance lambda_u (neighbours holding a different opinion). For two
// opinions lambda_u is the cut degree of u. The cache is bound to one graph;
// call rebind() when the round's graph changes.
class OpinionState {
 public:
  OpinionState() = default;
  OpinionState(const Graph& g, std::vector<Opinion> assignment, std::size_t kappa);

  static OpinionState distinct(const Graph& g);
  // Opinion 0 on `preferred` nodes, opinion 1 elsewhere.
  static OpinionState two_sided(const Graph& g, std::span<const Node> preferred);

  std::size_t node_count() const noexcept { return assignment_.size(); }
  std::size_t kappa() const noexcept { return counts_.size(); }
  std::span<const Opinion> assignment() const noexcept { return assignment_; }
  Opinion opinion(Node u) const noexcept { return assignment_[u]; }

  std::span<const std::size_t> counts() const noexcept { return counts_; }
  std::size_t count(Opinion i) const noexcept { return counts_[i]; }
  std::span<const std::uint64_t> volumes() const noexcept { return volumes_; }
  std::uint64_t volume(Opinion i) const noexcept { return volumes_[i]; }
  std::uint64_t total_volume() const noexcept { return total_volume_; }

  // vol(S_t): the smaller of vol(V^(0)) and 2m - vol(V^(0)).
  std::uint64_t minority_volume() const noexcept;
  // Opinion 0 if its volume is at most half the total, else opinion 1 (two opinions).
  Opinion minority_opinion() const noexcept;

  std::uint32_t discordance(Node u) const noexcept { return discordance_[u]; }
  std::span<const std::uint32_t> discordances() const noexcept { return discordance_; }
  // Number of edges whose endpoints disagree.
  std::size_t discordant_edges() const noexcept { return lambda_sum_ / 2; }
  // Nodes with discordance > 0, ascending.
  std::span<const Node> boundary() const noexcept { return boundary_; }

  std::size_t alive_opinions() const noexcept { return alive_; }
  bool is_consensus() const noexcept { return alive_ <= 1; }
  // The surviving opinion when in consensus.
  Opinion winner() const;

  std::size_t round() const noexcept { return round_; }
  void set_round(std::size_t t) noexcept { round_ = t; }

  // Throws InconsistentState if the cache disagrees with `g` or the assignment is invalid.
  void validate(const Graph& g) const;

  // Recomputes degree-dependent caches for a new round graph.
  void rebind(const Graph& g);

  // Applies simultaneous opinion changes (node, new opinion) and refreshes caches.
  void apply(const Graph& g, std::span<const std::pair<Node, Opinion>> changes);

 private:
  void recompute_discordance(const Graph& g, Node u);

  std::vector<Opinion> assignment_;
  std::vector<std::size_t> counts_;
  std::vector<std::uint64_t> volumes_;
  std::vector<std::uint32_t> discordance_;
  std::vector<Node> boundary_;
  std::vector<char> in_boundary_;
  std::uint64_t total_volume_ = 0;
  std::uint64_t lambda_sum_ = 0;
  std::size_t alive_ = 0;
  std::size_t round_ = 0;
};

}  // namespace voterlab
