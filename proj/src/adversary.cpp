#include "voterlab/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "voterlab/conductance.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/rng.hpp"

namespace voterlab {

PhiSchedule constant_schedule(double phi) {
  return [phi](std::size_t) { return phi; };
}

PhiSchedule cyclic_schedule(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidParams, "empty phi schedule");
  return [v = std::move(values)](std::size_t t) { return v[(t - 1) % v.size()]; };
}

StaticProvider::StaticProvider(std::shared_ptr<const Graph> g, std::optional<double> phi) : graph_(std::move(g)) {
  phi_ = phi ? *phi : conductance_lower_bound(conductance(*graph_));
}

namespace {

std::shared_ptr<const Graph> relabel(std::span<const Edge> edges, std::span<const Node> label, std::size_t n) {
  std::vector<Edge> mapped;
  mapped.reserve(edges.size());
  for (auto [u, v] : edges) mapped.emplace_back(label[u], label[v]);
  return std::make_shared<const Graph>(build_graph(mapped, n));
}

}  // namespace

ScheduleProvider::ScheduleProvider(std::size_t n, std::size_t n_prime, std::size_t d, PhiSchedule phi,
                                   std::uint64_t seed, double gamma)
    : n_(n), n_prime_(n_prime), d_(d), phi_(std::move(phi)), seed_(seed), gamma_(gamma),
      degrees_(n, static_cast<std::uint32_t>(d)) {}

RoundGraph ScheduleProvider::next(std::size_t t, const OpinionState&, std::span<const std::vector<Opinion>>) {
  const double phi = phi_(t);
  auto it = templates_.find(phi);
  if (it == templates_.end()) {
    it = templates_.emplace(phi, generate_cut_graph(n_, n_prime_, d_, phi, gamma_).graph.edges()).first;
  }
  std::vector<Node> label(n_);
  for (Node u = 0; u < n_; ++u) label[u] = u;
  Rng rng(seed_, t);
  for (std::size_t i = n_; i > 1; --i) std::swap(label[i - 1], label[rng.below(i)]);
  return {relabel(it->second, label, n_), phi};
}

AdaptiveCutAdversary::AdaptiveCutAdversary(std::size_t n, std::size_t d, PhiSchedule phi, double gamma)
    : n_(n), d_(d), phi_(std::move(phi)), gamma_(gamma), degrees_(n, static_cast<std::uint32_t>(d)) {}

std::shared_ptr<const Graph> AdaptiveCutAdversary::build(double phi, std::span<const Node> side) {
  const std::size_t n_prime = side.size();
  auto key = std::make_pair(n_prime, phi);
  auto it = templates_.find(key);
  if (it == templates_.end()) it = templates_.emplace(key, generate_cut_graph(n_, n_prime, d_, phi, gamma_)).first;
  const CutGraph& cg = it->second;

  std::vector<char> in_side(n_, 0);
  for (Node u : side) in_side[u] = 1;
  std::vector<Node> label;
  label.reserve(n_);
  label.insert(label.end(), side.begin(), side.end());
  for (Node u = 0; u < n_; ++u) {
    if (!in_side[u]) label.push_back(u);
  }
  const double c = static_cast<double>(cg.cut) / (phi * static_cast<double>(d_ * n_));
  achieved_c_ = std::max(achieved_c_, c);
  return relabel(cg.graph.edges(), label, n_);
}

std::shared_ptr<const Graph> AdaptiveCutAdversary::respond(std::size_t t, const OpinionState& current) {
  const Opinion small = current.count(0) <= current.count(1) ? 0 : 1;
  std::vector<Node> side;
  for (Node u = 0; u < n_; ++u) {
    if (current.opinion(u) == small) side.push_back(u);
  }
  if (last_ && static_cast<double>(side.size()) < gamma_ * static_cast<double>(n_)) return last_;
  if (last_ && side == last_side_) return last_;
  return build(phi_(t), side);
}

RoundGraph AdaptiveCutAdversary::next(std::size_t t, const OpinionState& current,
                                      std::span<const std::vector<Opinion>>) {
  if (current.kappa() != 2) throw Error(ErrorCode::InvalidParams, "cut adversary needs two opinions");
  const Opinion small = current.count(0) <= current.count(1) ? 0 : 1;
  std::vector<Node> side;
  for (Node u = 0; u < n_; ++u) {
    if (current.opinion(u) == small) side.push_back(u);
  }
  const double phi = phi_(t);
  const bool frozen = last_ && static_cast<double>(side.size()) < gamma_ * static_cast<double>(n_);
  if (!frozen && !(last_ && side == last_side_)) {
    last_ = build(phi, side);
    last_side_ = std::move(side);
    ++rebuilds_;
  }
  return {last_, phi};
}

DegreeChangingAdversary::DegreeChangingAdversary(std::size_t n, double phi) : n_(n), phi_(phi) {
  if (n < 2) throw Error(ErrorCode::InvalidParams, "degree-changing adversary needs n >= 2");
}

std::vector<Opinion> DegreeChangingAdversary::initial_assignment(std::size_t n) {
  std::vector<Opinion> a(n, 1);
  std::fill(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n / 2), 0);
  return a;
}

Graph DegreeChangingAdversary::build(std::span<const Opinion> assignment) {
  const std::size_t n = assignment.size();
  std::size_t zeros = static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), Opinion{0}));
  std::vector<Edge> edges;
  if (2 * zeros == n) {
    for (Node v = 1; v < n; ++v) edges.emplace_back(v - 1, v);
    return build_graph(edges, n);
  }
  const Opinion small = 2 * zeros < n ? 0 : 1;
  std::vector<Node> minority;
  std::vector<Node> majority;
  for (Node u = 0; u < n; ++u) (assignment[u] == small ? minority : majority).push_back(u);
  for (std::size_t i = 0; i < minority.size(); ++i) {
    for (std::size_t j = i + 1; j < minority.size(); ++j) edges.emplace_back(minority[i], minority[j]);
  }
  for (std::size_t i = 1; i < majority.size(); ++i) edges.emplace_back(majority[i - 1], majority[i]);
  if (!minority.empty()) edges.emplace_back(minority.front(), majority.front());
  return build_graph(edges, n);
}

RoundGraph DegreeChangingAdversary::next(std::size_t, const OpinionState& current,
                                         std::span<const std::vector<Opinion>>) {
  if (current.node_count() != n_ || current.kappa() != 2) {
    throw Error(ErrorCode::InvalidParams, "degree-changing adversary needs two opinions on n nodes");
  }
  const auto a = current.assignment();
  const bool balanced = 2 * current.count(0) == n_;
  if (!last_ || (!balanced && !std::equal(a.begin(), a.end(), last_assignment_.begin(), last_assignment_.end()))) {
    last_ = std::make_shared<const Graph>(build(a));
    last_assignment_.assign(a.begin(), a.end());
  }
  return {last_, phi_};
}

}  // namespace voterlab
