#include "voterlab/opinion_state.hpp"

#include <algorithm>
#include <string>

#include "voterlab/errors.hpp"

namespace voterlab {

BiasConfig::BiasConfig(std::vector<double> alphas) : alphas_(std::move(alphas)) {
  if (alphas_.size() < 2) throw Error(ErrorCode::InvalidParams, "bias needs at least two opinions");
  if (alphas_[0] != 1.0) throw Error(ErrorCode::InvalidParams, "alpha_0 must be 1");
  if (!(alphas_[1] < 1.0)) throw Error(ErrorCode::InvalidParams, "alpha_1 must be < 1");
  for (std::size_t i = 1; i < alphas_.size(); ++i) {
    if (!(alphas_[i] >= 0.0) || alphas_[i] > alphas_[i - 1]) {
      throw Error(ErrorCode::InvalidParams, "alphas must be non-increasing and non-negative");
    }
  }
}

OpinionState::OpinionState(const Graph& g, std::vector<Opinion> assignment, std::size_t kappa)
    : assignment_(std::move(assignment)) {
  if (assignment_.size() != g.node_count()) {
    throw Error(ErrorCode::InconsistentState, "assignment has " + std::to_string(assignment_.size()) +
                                                  " entries for " + std::to_string(g.node_count()) + " nodes");
  }
  if (kappa == 0) throw Error(ErrorCode::InconsistentState, "kappa must be positive");
  for (Opinion o : assignment_) {
    if (o >= kappa) throw Error(ErrorCode::InconsistentState, "opinion " + std::to_string(o) + " >= kappa");
  }
  counts_.assign(kappa, 0);
  for (Opinion o : assignment_) ++counts_[o];
  alive_ = static_cast<std::size_t>(std::count_if(counts_.begin(), counts_.end(), [](auto c) { return c > 0; }));
  rebind(g);
}

OpinionState OpinionState::distinct(const Graph& g) {
  std::vector<Opinion> a(g.node_count());
  for (Node u = 0; u < a.size(); ++u) a[u] = u;
  return OpinionState(g, std::move(a), std::max<std::size_t>(a.size(), 1));
}

OpinionState OpinionState::two_sided(const Graph& g, std::span<const Node> preferred) {
  std::vector<Opinion> a(g.node_count(), 1);
  for (Node u : preferred) {
    if (u >= a.size()) throw Error(ErrorCode::NodeOutOfRange, "node " + std::to_string(u));
    a[u] = 0;
  }
  return OpinionState(g, std::move(a), 2);
}

std::uint64_t OpinionState::minority_volume() const noexcept {
  const std::uint64_t v0 = volumes_.empty() ? 0 : volumes_[0];
  return std::min(v0, total_volume_ - v0);
}

Opinion OpinionState::minority_opinion() const noexcept {
  return 2 * volumes_[0] <= total_volume_ ? 0 : 1;
}

Opinion OpinionState::winner() const {
  if (!is_consensus()) throw Error(ErrorCode::InconsistentState, "no consensus yet");
  for (Opinion i = 0; i < counts_.size(); ++i) {
    if (counts_[i] > 0) return i;
  }
  return 0;
}

void OpinionState::recompute_discordance(const Graph& g, Node u) {
  std::uint32_t lam = 0;
  const Opinion o = assignment_[u];
  for (Node w : g.neighbors(u)) lam += assignment_[w] != o ? 1U : 0U;
  discordance_[u] = lam;
}

void OpinionState::rebind(const Graph& g) {
  const std::size_t n = assignment_.size();
  if (g.node_count() != n) {
    throw Error(ErrorCode::InconsistentState, "graph has " + std::to_string(g.node_count()) + " nodes, state has " +
                                                  std::to_string(n));
  }
  volumes_.assign(counts_.size(), 0);
  discordance_.assign(n, 0);
  in_boundary_.assign(n, 0);
  boundary_.clear();
  total_volume_ = 0;
  std::uint64_t lam_sum = 0;
  for (Node u = 0; u < n; ++u) {
    volumes_[assignment_[u]] += g.degree(u);
    total_volume_ += g.degree(u);
    recompute_discordance(g, u);
    lam_sum += discordance_[u];
    if (discordance_[u] > 0) {
      boundary_.push_back(u);
      in_boundary_[u] = 1;
    }
  }
  lambda_sum_ = lam_sum;
}

void OpinionState::apply(const Graph& g, std::span<const std::pair<Node, Opinion>> changes) {
  std::vector<Node> touched;
  touched.reserve(changes.size() * (g.max_degree() + 1));
  for (auto [u, o] : changes) {
    const Opinion old = assignment_[u];
    if (old == o) continue;
    if (o >= counts_.size()) throw Error(ErrorCode::InconsistentState, "opinion out of range");
    if (--counts_[old] == 0) --alive_;
    if (counts_[o]++ == 0) ++alive_;
    volumes_[old] -= g.degree(u);
    volumes_[o] += g.degree(u);
    assignment_[u] = o;
    touched.push_back(u);
    for (Node w : g.neighbors(u)) touched.push_back(w);
  }
  if (touched.empty()) return;
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

  std::vector<Node> added;
  bool removed = false;
  for (Node u : touched) {
    const std::uint32_t before = discordance_[u];
    recompute_discordance(g, u);
    lambda_sum_ = lambda_sum_ + discordance_[u] - before;
    const bool now = discordance_[u] > 0;
    if (now && !in_boundary_[u]) {
      in_boundary_[u] = 1;
      added.push_back(u);
    } else if (!now && in_boundary_[u]) {
      in_boundary_[u] = 0;
      removed = true;
    }
  }
  if (removed) {
    std::erase_if(boundary_, [&](Node u) { return !in_boundary_[u]; });
  }
  if (!added.empty()) {
    const auto mid = static_cast<std::ptrdiff_t>(boundary_.size());
    boundary_.insert(boundary_.end(), added.begin(), added.end());
    std::inplace_merge(boundary_.begin(), boundary_.begin() + mid, boundary_.end());
  }
}

void OpinionState::validate(const Graph& g) const {
  const std::size_t n = assignment_.size();
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InconsistentState, what); };
  if (g.node_count() != n) fail("state and graph disagree on node count");
  std::vector<std::size_t> counts(counts_.size(), 0);
  std::vector<std::uint64_t> vols(counts_.size(), 0);
  for (Node u = 0; u < n; ++u) {
    if (assignment_[u] >= counts_.size()) fail("opinion out of range at node " + std::to_string(u));
    ++counts[assignment_[u]];
    vols[assignment_[u]] += g.degree(u);
    std::uint32_t lam = 0;
    for (Node w : g.neighbors(u)) lam += assignment_[w] != assignment_[u] ? 1U : 0U;
    if (lam != discordance_[u]) fail("stale discordance at node " + std::to_string(u));
    if ((lam > 0) != static_cast<bool>(in_boundary_[u])) fail("stale boundary flag at node " + std::to_string(u));
  }
  if (counts != counts_) fail("stale opinion counts");
  if (vols != volumes_) fail("stale opinion volumes");
  if (!std::is_sorted(boundary_.begin(), boundary_.end())) fail("boundary not sorted");
}

}  // namespace voterlab
