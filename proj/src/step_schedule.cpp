#include "voterlab/step_schedule.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "voterlab/errors.hpp"

namespace voterlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sparse table for range minima over a static array.
class RangeMin {
 public:
  explicit RangeMin(std::vector<double> values) {
    table_.push_back(std::move(values));
    const std::size_t n = table_[0].size();
    for (std::size_t w = 1; (std::size_t{1} << w) <= n; ++w) {
      const auto& prev = table_.back();
      const std::size_t half = std::size_t{1} << (w - 1);
      std::vector<double> next(n - (std::size_t{1} << w) + 1);
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::min(prev[i], prev[i + half]);
      table_.push_back(std::move(next));
    }
  }
  // Minimum over [lo, hi]; +inf when empty.
  double query(std::size_t lo, std::size_t hi) const {
    if (lo > hi) return kInf;
    const auto w = static_cast<std::size_t>(std::bit_width(hi - lo + 1) - 1);
    return std::min(table_[w][lo], table_[w][hi - (std::size_t{1} << w) + 1]);
  }

 private:
  std::vector<std::vector<double>> table_;
};

void record(GoodSequenceReport& r, char property, std::size_t step, double value) {
  constexpr std::size_t kKeepPerProperty = 16;
  const auto same = std::count_if(r.violations.begin(), r.violations.end(),
                                  [&](const Violation& v) { return v.property == property; });
  if (static_cast<std::size_t>(same) < kKeepPerProperty) r.violations.push_back({property, step, value});
}

}  // namespace

StepSchedule decompose_round_into_steps(const Graph& g, const OpinionState& s) {
  StepSchedule out;
  std::vector<ScheduledStep> rest;       // boundary of S_t: non-preferred nodes next to preferred ones
  std::vector<ScheduledStep> preferred;  // boundary of S'_t
  for (Node u : s.boundary()) {
    const bool pref = s.opinion(u) == 0;
    std::uint32_t lam = 0;
    for (Node w : g.neighbors(u)) lam += (s.opinion(w) == 0) != pref ? 1U : 0U;
    if (lam == 0) continue;
    (pref ? preferred : rest).push_back({u, pref, false, lam});
  }
  out.steps.reserve(rest.size() + preferred.size());
  std::int64_t lam = 0;
  std::int64_t lam_p = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  const auto limit = static_cast<std::int64_t>(g.max_degree());
  while (i < rest.size() || j < preferred.size()) {
    const bool take_rest = j == preferred.size() || (lam <= lam_p && i < rest.size());
    const ScheduledStep& st = take_rest ? rest[i++] : preferred[j++];
    (take_rest ? lam : lam_p) += st.lambda;
    out.steps.push_back(st);
    out.lambda_sum.push_back(lam);
    out.lambda_prime_sum.push_back(lam_p);
    const std::int64_t gap = lam > lam_p ? lam - lam_p : lam_p - lam;
    out.max_gap = std::max(out.max_gap, static_cast<std::uint32_t>(gap));
    if (gap > limit) {
      throw Error(ErrorCode::InvariantViolation, "|Lambda - Lambda'| = " + std::to_string(gap) + " exceeds d = " +
                                                     std::to_string(limit) + " at step " +
                                                     std::to_string(out.steps.size()));
    }
  }
  return out;
}

void mark_flips(StepSchedule& schedule, const OpinionState& after) {
  for (auto& st : schedule.steps) st.flipped = (after.opinion(st.node) == 0) != st.preferred;
}

void StepTrace::append(const StepSchedule& schedule) {
  round_start.push_back(steps.size());
  for (const auto& st : schedule.steps) {
    steps.push_back(st);
    lambda.push_back(lambda.back() + (st.preferred ? 0 : st.lambda));
    lambda_prime.push_back(lambda_prime.back() + (st.preferred ? st.lambda : 0));
    gain.push_back(gain.back() + (!st.preferred && st.flipped ? 1 : 0));
    loss.push_back(loss.back() + (st.preferred && st.flipped ? 1 : 0));
  }
}

std::optional<std::size_t> StepTrace::interval_end(std::size_t i, double k) const {
  const double target = static_cast<double>(lambda[i]) + k;
  auto it = std::lower_bound(lambda.begin() + static_cast<std::ptrdiff_t>(i) + 1, lambda.end(), target,
                             [](std::int64_t v, double t) { return static_cast<double>(v) < t; });
  if (it == lambda.end()) return std::nullopt;
  return static_cast<std::size_t>(it - lambda.begin());
}

IntervalReport check_intervals(const StepTrace& trace, std::uint32_t d, std::size_t samples, Rng& rng) {
  IntervalReport r;
  r.max_length_slack = std::numeric_limits<std::int64_t>::min();
  const std::size_t L = trace.size();
  auto check = [&](std::size_t i, std::int64_t k) {
    const auto end = trace.interval_end(i, static_cast<double>(k));
    if (!end) return;
    ++r.checked;
    const auto len = static_cast<std::int64_t>(*end - i);
    const std::int64_t bound = 2 * k + 2 * static_cast<std::int64_t>(d);
    r.max_length_slack = std::max(r.max_length_slack, len - bound);
    if (len > bound) ++r.length_violations;
    if (trace.lambda_prime[*end] - trace.lambda_prime[i] > k + 2 * static_cast<std::int64_t>(d)) {
      ++r.prime_violations;
    }
  };
  if (L == 0) return r;
  if (samples == 0) {
    for (std::size_t i = 0; i < L; ++i) {
      const std::int64_t span = trace.lambda[L] - trace.lambda[i];
      for (std::int64_t k = 1; k <= span; ++k) check(i, k);
    }
  } else {
    for (std::size_t s = 0; s < samples; ++s) {
      const auto i = static_cast<std::size_t>(rng.below(L));
      const std::int64_t span = trace.lambda[L] - trace.lambda[i];
      if (span < 1) continue;
      check(i, 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span))));
    }
  }
  return r;
}

double good_sequence_ell(std::size_t n, double beta, double alpha1) {
  const double eps = 1.0 - alpha1;
  return 132.0 * beta * std::log(static_cast<double>(n)) / (eps * eps);
}

double good_sequence_beta_prime(std::uint32_t d, double alpha1) {
  if (alpha1 <= 0.0) return kInf;
  const double eps = 1.0 - alpha1;
  return 600.0 * d / (alpha1 * eps * eps);
}

GoodSequenceReport monitor_good_sequence(const StepTrace& trace, const BiasConfig& bias,
                                         const GoodSequenceParams& params) {
  GoodSequenceReport r;
  const double alpha1 = bias.alpha1();
  r.ell = params.ell_override.value_or(good_sequence_ell(params.n, params.beta, alpha1));
  r.beta_prime = params.beta_prime_override.value_or(good_sequence_beta_prime(params.d, alpha1));
  r.T_prime = 2.0 * r.beta_prime * static_cast<double>(params.n);

  const std::size_t L = trace.size();
  if (static_cast<double>(L) < r.T_prime && !trace.terminal) {
    throw Error(ErrorCode::TraceTooShort, "trace has " + std::to_string(L) + " steps, T' = " + std::to_string(r.T_prime));
  }
  const std::size_t H = static_cast<double>(L) < r.T_prime ? L : static_cast<std::size_t>(r.T_prime);
  r.horizon = H;

  const auto n = static_cast<std::int64_t>(params.n);
  const auto s0 = static_cast<std::int64_t>(trace.initial_preferred);
  std::vector<double> P(H + 1);
  for (std::size_t j = 0; j <= H; ++j) P[j] = static_cast<double>(trace.y(0, j));

  // (a)
  const std::int64_t final_count = s0 + trace.y(0, L);
  r.a_holds = (trace.terminal && final_count == n) || P[H] >= 2.0 * static_cast<double>(n);

  // (b)
  for (std::size_t j = 0; j <= H; ++j) {
    const double count = static_cast<double>(s0) + P[j];
    if (!(count > 1.0)) {
      ++r.violations_b;
      record(r, 'b', j, count);
    }
  }

  // Candidate interval ends: steps that raise Lambda.
  std::vector<char> raises(H + 1, 0);
  for (std::size_t j = 1; j <= H; ++j) raises[j] = trace.lambda[j] > trace.lambda[j - 1] ? 1 : 0;
  auto first_reaching = [&](std::size_t i, double k) -> std::size_t {
    // Smallest q > i with Lambda(q) >= Lambda(i) + k, or L + 1 if none.
    const auto q = trace.interval_end(i, k);
    return q ? *q : L + 1;
  };

  // (c): S_{i,k} ranges over the Lambda-raising steps j in (i, J] with Lambda(j-1) - Lambda(i) < T'.
  {
    std::vector<double> q(H + 1, kInf);
    for (std::size_t j = 1; j <= H; ++j) {
      if (raises[j]) q[j] = P[j];
    }
    RangeMin rmq(std::move(q));
    r.min_y_c = kInf;
    for (std::size_t i = 0; i < H; ++i) {
      const std::size_t J = std::min(H, first_reaching(i, r.T_prime));
      const double lo = rmq.query(i + 1, J);
      if (lo == kInf) continue;
      ++r.intervals_c;
      const double y = lo - P[i];
      r.min_y_c = std::min(r.min_y_c, y);
      if (y < -r.ell) {
        ++r.violations_c;
        record(r, 'c', i, y);
      }
    }
    if (r.min_y_c == kInf) r.min_y_c = 0.0;
  }

  // (d): for gamma in [ell, T'] with S = S_{i, gamma beta'} inside the horizon,
  // Y_{i,k} > gamma. For a fixed end j the binding gamma is (Lambda(j) - Lambda(i)) / beta'.
  r.min_margin_d = kInf;
  if (std::isfinite(r.beta_prime)) {
    const double bp = r.beta_prime;
    std::vector<double> q(H + 1, kInf);
    for (std::size_t j = 1; j <= H; ++j) {
      if (raises[j]) q[j] = P[j] - static_cast<double>(trace.lambda[j]) / bp;
    }
    RangeMin rmq(std::move(q));
    for (std::size_t i = 0; i < H; ++i) {
      const double base = P[i] - static_cast<double>(trace.lambda[i]) / bp;
      const std::size_t lo = first_reaching(i, r.ell * bp);
      if (lo > H) continue;
      const std::size_t cap = first_reaching(i, r.T_prime * bp);  // ends past this need gamma > T'
      double margin = rmq.query(lo, std::min(H, cap == L + 1 ? H : cap - 1)) - base;
      if (cap <= H && raises[cap] && cap >= lo) {
        margin = std::min(margin, (P[cap] - P[i]) - r.T_prime);
      }
      if (margin == kInf) continue;
      ++r.intervals_d;
      r.min_margin_d = std::min(r.min_margin_d, margin);
      if (!(margin > 0.0)) {
        ++r.violations_d;
        record(r, 'd', i, margin);
      }
    }
  }
  if (r.min_margin_d == kInf) r.min_margin_d = 0.0;
  return r;
}

std::vector<Checkpoint> checkpoint_schedule(std::size_t n, std::uint32_t d, const BiasConfig& bias,
                                            const std::function<double(std::size_t)>& phi,
                                            std::size_t max_rounds, double beta,
                                            std::optional<double> ell_override,
                                            std::optional<double> beta_prime_override) {
  if (n < 2) throw Error(ErrorCode::InvalidParams, "checkpoint schedule needs n >= 2");
  const double ell = ell_override.value_or(good_sequence_ell(n, beta, bias.alpha1()));
  const double bp = beta_prime_override.value_or(good_sequence_beta_prime(d, bias.alpha1()));
  const auto log_n = static_cast<std::size_t>(std::bit_width(n - 1));  // ceil(log2 n)
  const std::size_t j_max = 4 * log_n + 1;
  const double nd = static_cast<double>(n);
  const double dd = static_cast<double>(d);

  std::vector<Checkpoint> out;
  out.reserve(j_max + 1);
  double cumsum = 0.0;
  std::size_t t = 0;
  // tau(x) = min{t : sum_{s<=t} phi_s >= 2x}; rounds are scanned once since x only grows.
  auto tau = [&](double x) -> std::size_t {
    const double need = 2.0 * x;
    const double slack = 1e-9 * std::max(1.0, need);
    if (!std::isfinite(need)) {
      throw Error(ErrorCode::ScheduleExhausted, "phase index is not finite");
    }
    while (cumsum < need - slack) {
      if (t >= max_rounds) {
        throw Error(ErrorCode::ScheduleExhausted, "sum of phi stays below " + std::to_string(need) + " within " +
                                                      std::to_string(max_rounds) + " rounds");
      }
      cumsum += phi(++t);
    }
    return t;
  };

  for (std::size_t j = 0; j <= j_max; ++j) {
    Checkpoint c;
    c.j = j;
    if (j == 0) {
      c.phase = 0.0;
      c.zeta = 0.0;
    } else if (j == 1) {
      c.phase = 12.0 * ell * bp / dd;
      c.zeta = 2.0 * ell;
    } else if (j < j_max) {
      c.phase = 12.0 * ell * bp / dd + static_cast<double>(j - 1) * 24.0 * bp / dd;
      if (j <= 2 * log_n) {
        c.zeta = std::min(2.0 * ell * std::exp2(static_cast<double>(j) - 2.0), nd / 2.0);
      } else {
        const double e = std::log2(nd / 2.0) - static_cast<double>(j - 2 * log_n);
        c.zeta = std::min(nd - std::exp2(e), nd - 2.0 * ell);
      }
    } else {
      c.phase = 24.0 * ell * bp / dd + static_cast<double>(j_max - 1) * 24.0 * bp / dd;
      c.zeta = nd;
    }
    c.t = j == 0 ? 0 : tau(c.phase);
    out.push_back(c);
  }
  return out;
}

}  // namespace voterlab
