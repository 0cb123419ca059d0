#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voterlab/graph.hpp"
#include "voterlab/opinion_state.hpp"
#include "voterlab/rng.hpp"

namespace voterlab {

// One node-step of a round in the preferred-vs-rest view. `preferred` is o_j,
// `lambda` the number of neighbours on the other side at round start and
// `flipped` is Z_j (the node crossed sides in this round).
struct ScheduledStep {
  Node node = 0;
  bool preferred = false;
  bool flipped = false;
  std::uint32_t lambda = 0;
};

// Steps of one round. lambda_sum[j] and lambda_prime_sum[j] are Lambda and
// Lambda' after the first j steps of the round (index 0 is the round start).
struct StepSchedule {
  std::vector<ScheduledStep> steps;
  std::vector<std::int64_t> lambda_sum{0};
  std::vector<std::int64_t> lambda_prime_sum{0};
  std::uint32_t max_gap = 0;
};

// Orders the boundary of the preferred (opinion 0) side and of its complement:
// while Lambda <= Lambda' the next step is the smallest unconsidered
// non-preferred boundary node, otherwise the smallest unconsidered preferred
// one. Throws InvariantViolation if |Lambda - Lambda'| exceeds the maximum degree.
StepSchedule decompose_round_into_steps(const Graph& g, const OpinionState& s);

// Sets Z_j from the states before and after the round.
void mark_flips(StepSchedule& schedule, const OpinionState& after);

// Concatenated step sequence of a run with global prefix sums, all indexed
// by step count (index 0 = before the first step).
struct StepTrace {
  std::vector<ScheduledStep> steps;
  std::vector<std::int64_t> lambda{0};        // Lambda(j)
  std::vector<std::int64_t> lambda_prime{0};  // Lambda'(j)
  std::vector<std::int64_t> gain{0};          // X(0, j): non-preferred -> preferred switches
  std::vector<std::int64_t> loss{0};          // X'(0, j): preferred -> non-preferred switches
  std::vector<std::size_t> round_start;       // step index at which each round begins
  std::size_t initial_preferred = 0;          // |S_0|
  bool terminal = false;                      // trace ends in consensus

  std::size_t size() const noexcept { return steps.size(); }
  void append(const StepSchedule& schedule);
  // Net preferred change over steps (i, j].
  std::int64_t y(std::size_t i, std::size_t j) const { return (gain[j] - gain[i]) - (loss[j] - loss[i]); }
  // S_{i,k} = min{ j : Lambda(j) - Lambda(i) >= k }, or nullopt if not reached in the trace.
  std::optional<std::size_t> interval_end(std::size_t i, double k) const;
};

struct IntervalReport {
  std::size_t checked = 0;
  std::size_t length_violations = 0;  // |I_{i,k}| > 2k + 2d
  std::size_t prime_violations = 0;   // Lambda'(S_{i,k}) - Lambda'(i) > k + 2d
  std::int64_t max_length_slack = 0;  // max over checked of |I| - (2k + 2d)
};

// Checks both interval bounds on `samples` random (i, k) pairs with S_{i,k}
// inside the trace, or on all pairs when samples == 0.
IntervalReport check_intervals(const StepTrace& trace, std::uint32_t d, std::size_t samples, Rng& rng);

struct GoodSequenceParams {
  std::size_t n = 0;
  std::uint32_t d = 0;
  double beta = 8.0;
  std::optional<double> ell_override;
  std::optional<double> beta_prime_override;
};

struct Violation {
  char property = 'a';
  std::size_t step = 0;  // i for (c)/(d); the offending step for (b)
  double value = 0.0;    // offending Y (or preferred count for (b))
};

struct GoodSequenceReport {
  double beta_prime = 0.0;
  double ell = 0.0;
  double T_prime = 0.0;      // 2 beta' n steps
  std::size_t horizon = 0;   // steps evaluated: min(T', trace length)
  bool a_holds = false;      // Y_{0,T'} >= 2n, or the trace ends with the preferred opinion everywhere
  std::vector<Violation> violations;  // first few per property
  std::size_t violations_b = 0;
  std::size_t violations_c = 0;
  std::size_t violations_d = 0;
  std::size_t intervals_c = 0;  // (i, k) pairs evaluated for (c), counted per i
  std::size_t intervals_d = 0;
  double min_y_c = 0.0;         // smallest Y_{i,k} seen in (c)
  double min_margin_d = 0.0;    // smallest Y_{i,gamma beta'} - gamma seen in (d)

  bool clean_bcd() const { return violations_b + violations_c + violations_d == 0; }
  bool clean() const { return a_holds && clean_bcd(); }
};

// Evaluates good-sequence properties (a)-(d) over the first min(T', length)
// steps. Throws TraceTooShort when the trace is shorter than T' and did not
// end in consensus.
GoodSequenceReport monitor_good_sequence(const StepTrace& trace, const BiasConfig& bias,
                                         const GoodSequenceParams& params);

struct Checkpoint {
  std::size_t j = 0;
  std::size_t t = 0;      // round t_j
  double zeta = 0.0;      // lower bound on the preferred count at t_j
  double phase = 0.0;     // argument i of tau(i)
};

// Rounds t_j = tau(.) with tau(i) = min{t : sum_{s<=t} phi_s >= 2i} and the
// targets zeta(j), j = 0..j_max with j_max = 4 ceil(log2 n) + 1. Throws
// ScheduleExhausted if the cumulative phi does not reach a phase within max_rounds.
std::vector<Checkpoint> checkpoint_schedule(std::size_t n, std::uint32_t d, const BiasConfig& bias,
                                            const std::function<double(std::size_t)>& phi,
                                            std::size_t max_rounds, double beta = 8.0,
                                            std::optional<double> ell_override = std::nullopt,
                                            std::optional<double> beta_prime_override = std::nullopt);

// ell = 132 beta ln n / (1 - alpha_1)^2 and beta' = 600 d / (alpha_1 (1 - alpha_1)^2)
// (infinite when alpha_1 = 0).
double good_sequence_ell(std::size_t n, double beta, double alpha1);
double good_sequence_beta_prime(std::uint32_t d, double alpha1);

}  // namespace voterlab
