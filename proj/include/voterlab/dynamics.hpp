#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "voterlab/graph.hpp"
#include "voterlab/opinion_state.hpp"
#include "voterlab/provider.hpp"
#include "voterlab/rng.hpp"
#include "voterlab/step_schedule.hpp"

namespace voterlab {

using Change = std::pair<Node, Opinion>;

// Opinion changes of one synchronous round of the lazy standard voter model.
// Each boundary node u, in ascending order, draws r < 2 d_u and adopts the
// start-of-round opinion of neighbour r when r < d_u. Nodes with no
// discordant neighbour cannot change and consume no randomness.
void standard_voter_changes(const Graph& g, const OpinionState& s, Rng& rng, std::vector<Change>& out);

// Biased model: each boundary node picks a uniform neighbour and adopts its
// opinion i with probability alpha_i (one extra draw only when 0 < alpha_i < 1).
void biased_voter_changes(const Graph& g, const OpinionState& s, const BiasConfig& bias, Rng& rng,
                          std::vector<Change>& out);

// Value-returning rounds; validate the input state first.
OpinionState standard_voter_round(const Graph& g, const OpinionState& s, Rng& rng);
// Throws NonRegularGraph on irregular graphs unless allow_nonregular is set.
OpinionState biased_voter_round(const Graph& g, const OpinionState& s, const BiasConfig& bias, Rng& rng,
                                bool allow_nonregular = false);

// Psi_t = sqrt(vol(S_t)), g(Psi_t) = Psi_t^2 / (2cd), Z_t = g(Psi_t) + sum_{i<=t} phi_i.
struct PotentialTracker {
  double c = 1.0;
  double d = 1.0;
  std::uint64_t volume = 0;
  double psi = 0.0;
  double g_value = 0.0;
  double phi_cumsum = 0.0;
  double z_value = 0.0;

  PotentialTracker() = default;
  PotentialTracker(double c_, double d_, std::uint64_t initial_volume);
  // Records the state after a round that used conductance phi.
  void update(std::uint64_t vol_s, double phi);
  // psi^2 reproduces the volume and z = g + phi_cumsum.
  bool consistent() const;
};

// Constants b of the stopping thresholds
//   tau:    sum phi_t   >= b m / d_min
//   tau':   sum phi_t^2 >= b n ln n
//   tau'':  sum phi_t   >= b n
//   tau''': sum phi_t   >= b ln n
struct ThresholdConstants {
  double tau = 129.0;
  double tau_p = 96.0;
  double tau_pp = 1.0 / 19.0;
  double tau_ppp = 1.0;
};

struct Thresholds {
  std::optional<std::size_t> tau;
  std::optional<std::size_t> tau_p;
  std::optional<std::size_t> tau_pp;
  std::optional<std::size_t> tau_ppp;
};

enum class Model { Standard, Biased };

struct TraceRow {
  std::size_t t = 0;
  std::vector<std::size_t> counts;
  std::uint64_t vol_s = 0;
  double psi = 0.0;
  std::size_t cut = 0;
  double phi = 0.0;  // phi_t of the round that produced this state; 0 for t = 0
  bool consensus = false;
};

struct RunOptions {
  Model model = Model::Standard;
  BiasConfig bias;
  std::size_t max_rounds = 1'000'000;
  bool record_rows = false;
  // Biased model: reset node 0 to the preferred opinion whenever it vanishes.
  bool regeneration = false;
  // Biased model: decompose every round into steps and enforce |Lambda - Lambda'| <= d.
  bool check_balance = true;
  // Keep the decomposed steps in the trace (implies check_balance).
  bool record_steps = false;
  bool allow_nonregular = false;
  ThresholdConstants thresholds;
  double potential_c = 1.0;
};

struct TraceRecord {
  std::vector<TraceRow> rows;
  std::optional<std::size_t> consensus_time;  // T; empty when max_rounds was hit
  bool max_rounds_exceeded = false;
  std::size_t rounds_run = 0;
  std::optional<Opinion> winner;
  Thresholds thresholds;
  double phi_sum = 0.0;
  double phi_sq_sum = 0.0;
  std::size_t regenerations = 0;
  StepTrace steps;
  std::size_t steps_checked = 0;
  std::uint32_t max_balance_gap = 0;
  // Number of nodes holding opinion 0 at each round start (biased runs with record_steps).
  std::vector<std::size_t> preferred_counts;
};

// Runs rounds t = 1, 2, ... on the provider's graphs until consensus or
// max_rounds. Throws ProviderDegreeMismatch if a degree-preserving provider
// yields a graph with a different degree sequence, InvariantViolation if a
// round's step schedule breaks the balance rule.
TraceRecord run_until_consensus(GraphProvider& provider, OpinionState state, const RunOptions& options, Rng& rng);

// CSV header t,c0,...,c{k-1},volS,psi,cut,phi,consensus and one line per row.
void write_trace_csv(std::ostream& out, const TraceRecord& trace, std::size_t kappa);
// {"T":..., "thresholds":{"tau":...,...}, "seed":...} (null where unset).
std::string trace_summary_json(const TraceRecord& trace, std::uint64_t seed);

}  // namespace voterlab
