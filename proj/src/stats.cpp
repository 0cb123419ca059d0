#include "voterlab/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "voterlab/dynamics.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/step_schedule.hpp"

namespace voterlab {

Estimate estimate(std::span<const double> samples, double level, std::uint64_t base_seed) {
  Estimate e;
  e.trials = samples.size();
  e.base_seed = base_seed;
  if (samples.empty()) return e;
  const double n = static_cast<double>(samples.size());
  e.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - e.mean) * (x - e.mean);
  e.variance = samples.size() > 1 ? ss / (n - 1.0) : 0.0;

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  e.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);

  const double z = boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
  const double half = z * std::sqrt(e.variance / n);
  e.mean_ci = {level, e.mean - half, e.mean + half};

  // [x_(j), x_(m-j+1)] covers the median with probability P(j <= X <= m-j), X ~ Bin(m, 1/2).
  const boost::math::binomial_distribution<double> bin(static_cast<double>(m), 0.5);
  auto j = static_cast<std::size_t>(boost::math::quantile(bin, (1.0 - level) / 2.0));
  j = std::clamp<std::size_t>(j, 1, (m + 1) / 2);
  e.median_ci = {level, sorted[j - 1], sorted[m - j]};
  return e;
}

std::vector<double> collect_trials(std::size_t trials, std::uint64_t base_seed, std::size_t threads,
                                   const TrialFn& trial, std::size_t min_trials) {
  if (trials < min_trials) {
    throw Error(ErrorCode::TooFewTrials,
                std::to_string(trials) + " trials requested, at least " + std::to_string(min_trials) + " needed");
  }
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, trials);
  std::vector<double> out(trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < trials;) {
      try {
        Rng rng = trial_rng(base_seed, i);
        out[i] = trial(i, rng);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = trials;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

Estimate run_trials(std::size_t trials, std::uint64_t base_seed, std::size_t threads, const TrialFn& trial,
                    double level) {
  const auto samples = collect_trials(trials, base_seed, threads, trial);
  return estimate(samples, level, base_seed);
}

ScalingFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InsufficientSizes, "need >= 2 points");
  ScalingFit fit;
  fit.sizes.assign(x.begin(), x.end());
  fit.values.assign(y.begin(), y.end());
  const std::size_t k = x.size();
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) throw Error(ErrorCode::InvalidParams, "log-log fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(k);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InsufficientSizes, "all sizes equal");
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ly[i] - fit.intercept - fit.exponent * lx[i];
    rss += r * r;
  }
  fit.stderr_exponent = k > 2 ? std::sqrt(rss / static_cast<double>(k - 2) / sxx) : 0.0;
  fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  return fit;
}

ScalingFit fit_scaling(std::span<const double> sizes, std::span<const double> values) {
  if (sizes.size() < 4) throw Error(ErrorCode::InsufficientSizes, "scaling fit needs >= 4 sizes");
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  if (*hi < 8.0 * *lo) throw Error(ErrorCode::InsufficientSizes, "sizes must span a factor of 8");
  return fit_loglog(sizes, values);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidParams, "empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  // Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2)
  // with the usual small-sample correction of lambda.
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  if (lambda < 0.2) return r;
  double q = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  r.p_value = std::clamp(q, 0.0, 1.0);
  return r;
}

double binomial_cdf(std::size_t k, std::size_t n, double p) {
  if (k >= n) return 1.0;
  return boost::math::cdf(boost::math::binomial_distribution<double>(static_cast<double>(n), p),
                          static_cast<double>(k));
}

double binomial_lower_p_value(std::size_t successes, std::size_t n, double p0) {
  return binomial_cdf(successes, n, p0);
}

// ---- Dependent Chernoff -----------------------------------------------------

double chernoff_upper_bound(double b, double delta) {
  if (delta <= 0.0) return 1.0;
  return std::exp(b * (delta - (1.0 + delta) * std::log1p(delta)));
}

double chernoff_lower_bound(double b, double delta) { return std::exp(-b * delta * delta / 2.0); }

namespace {

constexpr double kSlack = 1e-9;

// Sequence with p_i = f(ones so far, steps so far). Under Upper the last
// probability is clipped so that sum p_i never exceeds the budget.
class PrefixGenerator final : public SequenceGenerator {
 public:
  using Rule = double (*)(std::size_t ones, std::size_t steps);
  PrefixGenerator(std::string name, Rule rule) : name_(std::move(name)), rule_(rule) {}
  std::string name() const override { return name_; }

  ChernoffSample sample(ChernoffPart part, double budget, Rng& rng) const override {
    ChernoffSample s;
    while (s.b_total < budget - kSlack) {
      double p = rule_(s.z, s.length);
      if (part == ChernoffPart::Upper) p = std::min(p, budget - s.b_total);
      s.b_total += p;
      s.z += rng.bernoulli(p) ? 1 : 0;
      ++s.length;
    }
    return s;
  }

 private:
  std::string name_;
  Rule rule_;
};

class VoterGenerator final : public SequenceGenerator {
 public:
  VoterGenerator(bool gain, std::shared_ptr<const Graph> g, std::vector<Opinion> init, double alpha1)
      : gain_(gain), g_(std::move(g)), init_(std::move(init)), alpha1_(alpha1) {
    if (!g_->is_regular()) throw Error(ErrorCode::NonRegularGraph, "voter generators use regular graphs");
    if (alpha1_ <= 0.0 || alpha1_ >= 1.0) throw Error(ErrorCode::InvalidParams, "alpha_1 must be in (0, 1)");
    OpinionState probe(*g_, init_, 2);
    if (probe.is_consensus()) throw Error(ErrorCode::InvalidParams, "initial state must not be a consensus");
  }
  std::string name() const override { return gain_ ? "voter-gain" : "voter-loss"; }

  ChernoffSample sample(ChernoffPart part, double budget, Rng& rng) const override {
    const Graph& g = *g_;
    const double d = g.max_degree();
    OpinionState state(g, init_, 2);
    ChernoffSample s;
    std::vector<Change> changes;
    std::size_t idle_rounds = 0;
    while (s.b_total < budget - kSlack) {
      if (state.is_consensus()) state = OpinionState(g, init_, 2);
      const auto schedule = decompose_round_into_steps(g, state);
      changes.clear();
      bool counted = false;
      for (const auto& step : schedule.steps) {
        // Two opinions: a non-preferred node adopts w.p. lambda/d, a preferred one w.p. alpha_1 lambda/d.
        const double p = (step.preferred ? alpha1_ : 1.0) * step.lambda / d;
        const bool flip = rng.bernoulli(p);
        if (flip) changes.emplace_back(step.node, static_cast<Opinion>(step.preferred ? 1 : 0));
        const bool ours = gain_ ? !step.preferred : step.preferred;
        if (!ours || s.b_total >= budget - kSlack) continue;
        if (part == ChernoffPart::Upper && s.b_total + p > budget + kSlack) continue;  // thinned out
        s.b_total += p;
        s.z += flip ? 1 : 0;
        ++s.length;
        counted = true;
      }
      state.apply(g, changes);
      // Under Upper the remaining budget may be smaller than any available p.
      idle_rounds = counted ? 0 : idle_rounds + 1;
      if (part == ChernoffPart::Upper && idle_rounds > 64) break;
    }
    return s;
  }

 private:
  bool gain_;
  std::shared_ptr<const Graph> g_;
  std::vector<Opinion> init_;
  double alpha1_;
};

}  // namespace

std::unique_ptr<SequenceGenerator> iid_generator() {
  return std::make_unique<PrefixGenerator>("iid", [](std::size_t, std::size_t) { return 0.5; });
}

std::unique_ptr<SequenceGenerator> momentum_generator() {
  return std::make_unique<PrefixGenerator>("momentum", [](std::size_t ones, std::size_t steps) {
    return steps == 0 ? 0.5 : 0.2 + 0.6 * static_cast<double>(ones) / static_cast<double>(steps);
  });
}

std::unique_ptr<SequenceGenerator> contrarian_generator() {
  return std::make_unique<PrefixGenerator>("contrarian", [](std::size_t ones, std::size_t steps) {
    return steps == 0 ? 0.5 : 0.8 - 0.6 * static_cast<double>(ones) / static_cast<double>(steps);
  });
}

std::unique_ptr<SequenceGenerator> voter_gain_generator(std::shared_ptr<const Graph> g, std::vector<Opinion> init,
                                                        double alpha1) {
  return std::make_unique<VoterGenerator>(true, std::move(g), std::move(init), alpha1);
}

std::unique_ptr<SequenceGenerator> voter_loss_generator(std::shared_ptr<const Graph> g, std::vector<Opinion> init,
                                                        double alpha1) {
  return std::make_unique<VoterGenerator>(false, std::move(g), std::move(init), alpha1);
}

ChernoffReport dependent_chernoff_check(const SequenceGenerator& gen, ChernoffPart part, double b, double delta,
                                        std::size_t trials, std::uint64_t seed, std::size_t threads) {
  if (b < 0.0 || delta < 0.0 || (part == ChernoffPart::Lower && delta >= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "need b >= 0, delta >= 0 (delta < 1 for the lower tail)");
  }
  ChernoffReport r;
  r.family = gen.name();
  r.part = part;
  r.b = b;
  r.delta = delta;
  r.trials = trials;
  r.bound = part == ChernoffPart::Upper ? chernoff_upper_bound(b, delta) : chernoff_lower_bound(b, delta);

  std::vector<double> totals(trials);
  const auto hits = collect_trials(trials, seed, threads, [&](std::size_t i, Rng& rng) {
    const auto s = gen.sample(part, b, rng);
    totals[i] = s.b_total;
    const bool broken = part == ChernoffPart::Upper ? s.b_total > b + 1e-6 : s.b_total < b - 1e-6;
    if (broken) {
      throw Error(ErrorCode::CertificateViolated,
                  gen.name() + ": sum of p_i = " + std::to_string(s.b_total) + " breaks the budget");
    }
    const double z = static_cast<double>(s.z);
    return (part == ChernoffPart::Upper ? z > (1.0 + delta) * b : z < (1.0 - delta) * b) ? 1.0 : 0.0;
  }, 1);
  r.tail_hits = static_cast<std::size_t>(std::accumulate(hits.begin(), hits.end(), 0.0));
  r.empirical = static_cast<double>(r.tail_hits) / static_cast<double>(trials);
  r.sigma = std::sqrt(r.empirical * (1.0 - r.empirical) / static_cast<double>(trials));
  const auto [lo, hi] = std::minmax_element(totals.begin(), totals.end());
  r.min_b_total = *lo;
  r.max_b_total = *hi;
  r.pass = r.empirical <= r.bound + 3.0 * r.sigma;
  return r;
}

SubmartingaleSample submartingale_check(const Graph& g, const OpinionState& state, double phi, double c,
                                        std::size_t samples, Rng& rng) {
  if (state.kappa() != 2) throw Error(ErrorCode::InvalidParams, "submartingale check needs two opinions");
  if (samples < 2) throw Error(ErrorCode::TooFewTrials, "need at least 2 samples");
  OpinionState s = state;
  s.rebind(g);
  const double d = g.max_degree();
  const std::uint64_t two_m = s.total_volume();
  const std::uint64_t vol0 = s.volume(0);
  const double before = static_cast<double>(std::min(vol0, two_m - vol0));
  SubmartingaleSample out;
  out.psi = std::sqrt(before);
  out.minority_count = std::min(s.count(0), s.count(1));
  std::vector<Change> changes;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    changes.clear();
    standard_voter_changes(g, s, rng, changes);
    std::int64_t v = static_cast<std::int64_t>(vol0);
    for (auto [u, o] : changes) v += o == 0 ? g.degree(u) : -static_cast<std::int64_t>(g.degree(u));
    const auto vu = static_cast<std::uint64_t>(v);
    const double after = static_cast<double>(std::min(vu, two_m - vu));
    const double dz = (after - before) / (2.0 * c * d) + phi;
    sum += dz;
    sum_sq += dz * dz;
  }
  const double n = static_cast<double>(samples);
  out.mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0));
  out.se = std::sqrt(var / n);
  out.pass = out.mean + 3.0 * out.se >= 0.0;
  return out;
}

}  // namespace voterlab
