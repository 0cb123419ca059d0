#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "voterlab/generators.hpp"
#include "voterlab/provider.hpp"

namespace voterlab {

using PhiSchedule = std::function<double(std::size_t)>;  // t -> phi_t, t >= 1

PhiSchedule constant_schedule(double phi);
// phi_t = values[(t - 1) mod size]
PhiSchedule cyclic_schedule(std::vector<double> values);

// Yields the same graph every round with phi_t = conductance(g): exact for
// n <= 26, the Cheeger lower end otherwise, unless `phi` is given.
class StaticProvider final : public GraphProvider {
 public:
  explicit StaticProvider(std::shared_ptr<const Graph> g, std::optional<double> phi = std::nullopt);
  explicit StaticProvider(Graph g, std::optional<double> phi = std::nullopt)
      : StaticProvider(std::make_shared<const Graph>(std::move(g)), phi) {}

  RoundGraph next(std::size_t, const OpinionState&, std::span<const std::vector<Opinion>>) override {
    return {graph_, phi_};
  }
  std::span<const std::uint32_t> degree_sequence() const override { return graph_->degrees(); }
  double phi() const { return phi_; }
  const std::shared_ptr<const Graph>& graph() const { return graph_; }

 private:
  std::shared_ptr<const Graph> graph_;
  double phi_ = 0.0;
};

// Cut-graph family with k tuned to phi_t each round and node labels drawn
// from a fresh uniform permutation (stream `seed`, counter t).
class ScheduleProvider final : public GraphProvider {
 public:
  ScheduleProvider(std::size_t n, std::size_t n_prime, std::size_t d, PhiSchedule phi, std::uint64_t seed,
                   double gamma = 0.125);

  RoundGraph next(std::size_t t, const OpinionState&, std::span<const std::vector<Opinion>>) override;
  std::span<const std::uint32_t> degree_sequence() const override { return degrees_; }

 private:
  std::size_t n_;
  std::size_t n_prime_;
  std::size_t d_;
  PhiSchedule phi_;
  std::uint64_t seed_;
  double gamma_;
  std::vector<std::uint32_t> degrees_;
  std::map<double, std::vector<Edge>> templates_;
};

// Lower-bound adversary. Before round t it looks at the smaller opinion class
// s_{t-1}; if |s| >= gamma n it rebuilds a cut graph with S = s (template ids
// 0..|s|-1 mapped to s in increasing order, the rest to V \ s in increasing
// order), so |cut(s, V \ s)| = 2k - 2 with k = ceil(phi_t d |s|). Otherwise the
// previous graph is kept.
class AdaptiveCutAdversary final : public GraphProvider {
 public:
  AdaptiveCutAdversary(std::size_t n, std::size_t d, PhiSchedule phi, double gamma = 0.125);

  RoundGraph next(std::size_t t, const OpinionState& current, std::span<const std::vector<Opinion>>) override;
  std::span<const std::uint32_t> degree_sequence() const override { return degrees_; }
  bool uses_history() const override { return false; }

  // Graph the adversary would play against `current` in round t, without
  // touching the provider's memory.
  std::shared_ptr<const Graph> respond(std::size_t t, const OpinionState& current);

  std::size_t rebuilds() const { return rebuilds_; }
  // Largest |cut| / (phi_t d n) over rebuilt rounds: the constant c actually achieved.
  double achieved_c() const { return achieved_c_; }
  double gamma() const { return gamma_; }

 private:
  std::shared_ptr<const Graph> build(double phi, std::span<const Node> side);

  std::size_t n_;
  std::size_t d_;
  PhiSchedule phi_;
  double gamma_;
  std::vector<std::uint32_t> degrees_;
  std::map<std::pair<std::size_t, double>, CutGraph> templates_;
  std::shared_ptr<const Graph> last_;
  std::vector<Node> last_side_;
  std::size_t rebuilds_ = 0;
  double achieved_c_ = 0.0;
};

// Degree-changing adversary. Starts from the path 0-1-...-(n-1). Whenever
// the two opinion counts differ, the smaller class M forms a clique, the
// larger class R forms a path in increasing id order, and the single bridge
// joins min(M) to min(R). With equal counts the previous graph is kept.
class DegreeChangingAdversary final : public GraphProvider {
 public:
  explicit DegreeChangingAdversary(std::size_t n, double phi = 0.0);

  RoundGraph next(std::size_t t, const OpinionState& current, std::span<const std::vector<Opinion>>) override;
  std::span<const std::uint32_t> degree_sequence() const override { return {}; }
  bool preserves_degrees() const override { return false; }

  // Graph for a given split (counts must differ), or the path when they agree.
  static Graph build(std::span<const Opinion> assignment);
  // Initial line assignment: opinion 0 on the first n/2 nodes.
  static std::vector<Opinion> initial_assignment(std::size_t n);

 private:
  std::size_t n_;
  double phi_;
  std::shared_ptr<const Graph> last_;
  std::vector<Opinion> last_assignment_;
};

}  // namespace voterlab
