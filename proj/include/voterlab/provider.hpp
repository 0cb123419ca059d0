#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "voterlab/graph.hpp"
#include "voterlab/opinion_state.hpp"

namespace voterlab {

// The graph used in one round together with the conductance value phi_t the
// schedule attributes to it.
struct RoundGraph {
  std::shared_ptr<const Graph> graph;
  double phi = 0.0;
};

// Dynamic-graph contract. next(t, ...) returns G_t for round t >= 1, given the
// state after round t-1 and the assignments of all earlier rounds (oldest
// first, ending with the current one) when uses_history() is true.
class GraphProvider {
 public:
  virtual ~GraphProvider() = default;

  virtual RoundGraph next(std::size_t t, const OpinionState& current,
                          std::span<const std::vector<Opinion>> history) = 0;

  // Fixed degree sequence d_1..d_n every yielded graph must match.
  virtual std::span<const std::uint32_t> degree_sequence() const = 0;
  virtual bool preserves_degrees() const { return true; }
  virtual bool uses_history() const { return false; }
};

}  // namespace voterlab
