#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "voterlab/graph.hpp"
#include "voterlab/opinion_state.hpp"

namespace voterlab {

struct ChainSolution {
  // Fixation: {P(opinion 0 prevails), P(opinion 1 prevails)}. Consensus time: {1}.
  std::vector<double> absorption_probabilities;
  double expected_absorption_time = 0.0;
  std::size_t state_space_size = 0;
  bool rational = false;              // solved in exact rational arithmetic
  std::string probability_exact;      // "p/q" when rational
  std::string time_exact;             // "p/q" when rational
  double residual = 0.0;              // max |Ax - b| of the floating solve
};

inline constexpr std::size_t kMaxFixationNodes = 14;
inline constexpr std::size_t kMaxRationalNodes = 8;
inline constexpr std::size_t kMaxConsensusNodes = 12;
inline constexpr std::size_t kMaxOneStepBoundary = 30;

// Absorption probabilities and times of the two-opinion lazy voter chain for
// every start. Index = bitmask of the nodes holding opinion 0.
struct FixationTable {
  std::vector<double> prevail;  // P(opinion 0 prevails)
  std::vector<double> time;     // E[T]
  std::vector<std::string> prevail_exact;  // filled when rational
  bool rational = false;
  double residual = 0.0;
};

// Rational Gaussian elimination for n <= 8, sparse LU with a residual check
// (<= 1e-10) up to n = 14. Throws TooLarge beyond that or when the transition
// count exceeds the solver budget.
FixationTable fixation_table(const Graph& g);
ChainSolution exact_fixation_probability(const Graph& g, const OpinionState& init);

// E[T] for any number of opinions, n <= 12, over the chain of set partitions
// (opinion labels do not affect T). Rational when the partition chain has at
// most `rational_state_limit` transient states and n <= 8.
ChainSolution exact_expected_consensus_time(const Graph& g, const OpinionState& init,
                                            std::size_t rational_state_limit = 400);

// Law of vol(V^(0)_{t+1}) after one lazy standard round from a two-opinion state.
struct OneStepDistribution {
  std::uint64_t total_volume = 0;    // 2m
  std::uint64_t current_volume = 0;  // vol(V^(0)_t)
  std::vector<double> pmf;           // pmf[v] = P(vol(V^(0)_{t+1}) = v), v = 0..2m
  double expected_volume = 0.0;
  double psi = 0.0;                  // sqrt(min(vol, 2m - vol)) now
  double expected_psi_next = 0.0;    // E[sqrt(min(vol', 2m - vol'))]
};

// Convolution of the independent node increments X_u = +-d_u w.p. lambda_u/(2 d_u).
// Throws BoundaryTooLarge above 30 boundary nodes.
OneStepDistribution exact_one_step_distribution(const Graph& g, const OpinionState& state);

struct DriftCertificate {
  std::vector<Opinion> state;
  double psi = 0.0;
  double exact_expected_psi_next = 0.0;
  double bound_upper = 0.0;         // Psi - sum_{u in s_t} lambda_u d_u / (32 Psi^3)
  double statement_upper = 0.0;     // same with the sum over all of V
  std::optional<double> bound_lower;  // Psi - c phi d / Psi
  bool satisfied = false;           // the checked inequality
  bool statement_satisfied = false; // reported only
  std::string state_bits() const;
};

// s_t is the class of smaller volume (opinion 0 on ties). Throws
// PreconditionViolation on consensus states.
DriftCertificate verify_drift_upper(const Graph& g, const OpinionState& state);

// Requires a regular graph (NonRegularGraph) and |cut| <= c phi d n
// (PreconditionCutTooLarge).
DriftCertificate verify_drift_lower(const Graph& g, const OpinionState& state, double c, double phi);

// JSON row {state_bits, exact, bound, satisfied}.
std::string certificate_json(const DriftCertificate& cert, bool lower = false);

// A finitely supported law: (value, probability) atoms.
using Law = std::vector<std::pair<double, double>>;

struct MomentReport {
  double brute_force = 0.0;  // E[(sum Z_i)^3] by enumeration
  double formula = 0.0;      // sum_i E[Z_i^3] - 3 E[Z_i^2] E[Z_i] + 2 E[Z_i]^3
  double max_abs_deviation = 0.0;
  std::size_t atoms = 0;
};

inline constexpr std::size_t kMaxProductAtoms = 1'000'000;

// Throws NonzeroMean when sum E[Z_i] != 0, SupportTooLarge past 10^6 joint atoms.
MomentReport third_moment_identity(const std::vector<Law>& laws);

struct TestFunction {
  std::string name;
  std::function<double(double)> f;
};

TestFunction sqrt_shift(double a);   // sqrt(max(a + x, 0))
TestFunction neg_square();           // -x^2
TestFunction min_cap(double k);      // min(x, K)
TestFunction linear(double slope);   // slope * x
TestFunction square();               // x^2 (convex; for guard tests)

struct DominanceResult {
  std::string name;
  double ex = 0.0;  // E[f(sum X)]
  double ey = 0.0;  // E[f(sum Y)]
  bool concave_on_support = false;
  bool holds = false;  // ex <= ey + 1e-12; only meaningful when concave_on_support
};

struct DominanceReport {
  std::vector<DominanceResult> results;
  std::size_t atoms = 0;
  bool all_hold() const;  // every concave f satisfies the inequality
};

DominanceReport concave_dominance_check(const std::vector<Law>& x_laws, const std::vector<Law>& y_laws,
                                        const std::vector<TestFunction>& functions);

// X_u and Y_u laws of the minority-side drift argument, over boundary nodes in
// increasing order, with s_t the smaller-volume class.
struct DominanceLaws {
  std::vector<Law> x;
  std::vector<Law> y;
  double minority_volume = 0.0;
};
DominanceLaws dominance_laws(const Graph& g, const OpinionState& state);

}  // namespace voterlab
