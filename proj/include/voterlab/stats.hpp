#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "voterlab/graph.hpp"
#include "voterlab/opinion_state.hpp"
#include "voterlab/rng.hpp"

namespace voterlab {

struct ConfidenceInterval {
  double level = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct Estimate {
  double mean = 0.0;
  double median = 0.0;
  double variance = 0.0;  // unbiased sample variance
  std::size_t trials = 0;
  ConfidenceInterval mean_ci;    // normal approximation
  ConfidenceInterval median_ci;  // order statistics (binomial)
  std::uint64_t base_seed = 0;   // trial i used trial_rng(base_seed, i)
};

inline constexpr std::size_t kMinTrials = 100;

Estimate estimate(std::span<const double> samples, double level = 0.99, std::uint64_t base_seed = 0);

using TrialFn = std::function<double(std::size_t trial, Rng& rng)>;

// Runs trial i with trial_rng(base_seed, i) for i < trials over `threads`
// workers (0 = hardware concurrency). Output order is by trial index, so the
// result does not depend on the thread count. Throws TooFewTrials below
// `min_trials`.
std::vector<double> collect_trials(std::size_t trials, std::uint64_t base_seed, std::size_t threads,
                                   const TrialFn& trial, std::size_t min_trials = kMinTrials);
Estimate run_trials(std::size_t trials, std::uint64_t base_seed, std::size_t threads, const TrialFn& trial,
                    double level = 0.99);

struct ScalingFit {
  std::vector<double> sizes;
  std::vector<double> values;
  double exponent = 0.0;  // slope of log(value) on log(size)
  double intercept = 0.0;
  double stderr_exponent = 0.0;
  double r_squared = 0.0;
};

// Log-log least squares. Needs >= 4 sizes spanning at least a factor of 8
// (InsufficientSizes).
ScalingFit fit_scaling(std::span<const double> sizes, std::span<const double> values);
// The same regression without the size-range requirement (>= 2 points).
ScalingFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic Kolmogorov p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// P(X <= k) for X ~ Bin(n, p).
double binomial_cdf(std::size_t k, std::size_t n, double p);
// One-sided test of H0: p >= p0 given `successes` out of n; returns P(X <= successes | p0).
double binomial_lower_p_value(std::size_t successes, std::size_t n, double p0);

// ---- Dependent Chernoff -----------------------------------------------------

enum class ChernoffPart { Upper, Lower };  // (a): sum p <= b, (b): sum p >= b

struct ChernoffSample {
  std::size_t z = 0;     // sum of Z_i
  double b_total = 0.0;  // sum of the conditional probabilities p_i
  std::size_t length = 0;
};

// One sequence of binary Z_i with their conditional probabilities p_i. Under
// Upper the generator must keep sum p_i <= budget; under Lower it must reach
// sum p_i >= budget.
class SequenceGenerator {
 public:
  virtual ~SequenceGenerator() = default;
  virtual std::string name() const = 0;
  virtual ChernoffSample sample(ChernoffPart part, double budget, Rng& rng) const = 0;
};

// p_i = 1/2, length 2b (so sum p_i = b exactly).
std::unique_ptr<SequenceGenerator> iid_generator();
// p_i = 0.2 + 0.6 * (fraction of ones so far): success breeds success.
std::unique_ptr<SequenceGenerator> momentum_generator();
// p_i = 0.8 - 0.6 * (fraction of ones so far).
std::unique_ptr<SequenceGenerator> contrarian_generator();
// Steps of a biased voter run (two opinions, alpha_1) on g from `init`, in
// schedule order. Gain: Z_j = 1 when a non-preferred node adopts the preferred
// opinion (p = lambda/d). Loss: Z_j = 1 when a preferred node switches
// (p = alpha_1 lambda/d). The run restarts from `init` on consensus.
std::unique_ptr<SequenceGenerator> voter_gain_generator(std::shared_ptr<const Graph> g, std::vector<Opinion> init,
                                                        double alpha1);
std::unique_ptr<SequenceGenerator> voter_loss_generator(std::shared_ptr<const Graph> g, std::vector<Opinion> init,
                                                        double alpha1);

double chernoff_upper_bound(double b, double delta);  // (e^delta / (1+delta)^(1+delta))^b
double chernoff_lower_bound(double b, double delta);  // exp(-b delta^2 / 2)

struct ChernoffReport {
  std::string family;
  ChernoffPart part = ChernoffPart::Upper;
  double b = 0.0;
  double delta = 0.0;
  std::size_t trials = 0;
  std::size_t tail_hits = 0;
  double empirical = 0.0;
  double sigma = 0.0;  // binomial standard error of `empirical`
  double bound = 0.0;
  double max_b_total = 0.0;
  double min_b_total = 0.0;
  bool pass = false;  // empirical <= bound + 3 sigma
};

// Tail event: Z > (1+delta) b for Upper, Z < (1-delta) b for Lower. Throws
// CertificateViolated if a sample breaks its sum-p certificate.
ChernoffReport dependent_chernoff_check(const SequenceGenerator& gen, ChernoffPart part, double b, double delta,
                                        std::size_t trials, std::uint64_t seed, std::size_t threads = 0);

// ---- Submartingale ----------------------------------------------------------

struct SubmartingaleSample {
  double mean = 0.0;  // estimated E[Z_{t+1} - Z_t | state]
  double se = 0.0;
  double psi = 0.0;
  std::size_t minority_count = 0;
  bool pass = false;  // mean + 3 se >= 0
};

// Conditional Monte Carlo of Z_{t+1} - Z_t = (vol(S_{t+1}) - vol(S_t)) / (2cd) + phi
// for one lazy standard round on g from `state`.
SubmartingaleSample submartingale_check(const Graph& g, const OpinionState& state, double phi, double c,
                                        std::size_t samples, Rng& rng);

}  // namespace voterlab
