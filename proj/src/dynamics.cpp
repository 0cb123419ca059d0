#include "voterlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "voterlab/errors.hpp"

namespace voterlab {

void standard_voter_changes(const Graph& g, const OpinionState& s, Rng& rng, std::vector<Change>& out) {
  out.clear();
  for (Node u : s.boundary()) {
    const auto nbrs = g.neighbors(u);
    const std::uint64_t r = rng.below(2 * nbrs.size());
    if (r >= nbrs.size()) continue;
    const Opinion o = s.opinion(nbrs[r]);
    if (o != s.opinion(u)) out.emplace_back(u, o);
  }
}

void biased_voter_changes(const Graph& g, const OpinionState& s, const BiasConfig& bias, Rng& rng,
                          std::vector<Change>& out) {
  out.clear();
  for (Node u : s.boundary()) {
    const auto nbrs = g.neighbors(u);
    const Opinion o = s.opinion(nbrs[rng.below(nbrs.size())]);
    if (o != s.opinion(u) && rng.bernoulli(bias.alpha(o))) out.emplace_back(u, o);
  }
}

OpinionState standard_voter_round(const Graph& g, const OpinionState& s, Rng& rng) {
  s.validate(g);
  std::vector<Change> changes;
  standard_voter_changes(g, s, rng, changes);
  OpinionState next = s;
  next.apply(g, changes);
  next.set_round(s.round() + 1);
  return next;
}

OpinionState biased_voter_round(const Graph& g, const OpinionState& s, const BiasConfig& bias, Rng& rng,
                                bool allow_nonregular) {
  s.validate(g);
  if (!allow_nonregular && !g.is_regular()) {
    throw Error(ErrorCode::NonRegularGraph, "biased dynamics expect a regular graph");
  }
  if (bias.kappa() < s.kappa()) throw Error(ErrorCode::InconsistentState, "bias defines fewer opinions than the state");
  std::vector<Change> changes;
  biased_voter_changes(g, s, bias, rng, changes);
  OpinionState next = s;
  next.apply(g, changes);
  next.set_round(s.round() + 1);
  return next;
}

PotentialTracker::PotentialTracker(double c_, double d_, std::uint64_t initial_volume) : c(c_), d(d_) {
  update(initial_volume, 0.0);
}

void PotentialTracker::update(std::uint64_t vol_s, double phi) {
  volume = vol_s;
  psi = std::sqrt(static_cast<double>(vol_s));
  g_value = static_cast<double>(vol_s) / (2.0 * c * d);
  phi_cumsum += phi;
  z_value = g_value + phi_cumsum;
}

bool PotentialTracker::consistent() const {
  const double v = static_cast<double>(volume);
  return std::abs(psi * psi - v) <= 1e-9 * std::max(1.0, v) &&
         std::abs(z_value - (g_value + phi_cumsum)) <= 1e-12 * std::max(1.0, std::abs(z_value));
}

namespace {

TraceRow make_row(std::size_t t, const OpinionState& s, double phi) {
  TraceRow row;
  row.t = t;
  row.counts.assign(s.counts().begin(), s.counts().end());
  row.vol_s = s.minority_volume();
  row.psi = std::sqrt(static_cast<double>(row.vol_s));
  row.cut = s.discordant_edges();
  row.phi = phi;
  row.consensus = s.is_consensus();
  return row;
}

void check_degrees(const GraphProvider& provider, const Graph& g) {
  const auto expected = provider.degree_sequence();
  const auto got = g.degrees();
  if (!std::equal(expected.begin(), expected.end(), got.begin(), got.end())) {
    throw Error(ErrorCode::ProviderDegreeMismatch, "yielded graph changes the degree sequence");
  }
}

}  // namespace

TraceRecord run_until_consensus(GraphProvider& provider, OpinionState state, const RunOptions& options, Rng& rng) {
  TraceRecord trace;
  const std::size_t n = state.node_count();
  const bool biased = options.model == Model::Biased;
  const bool steps_on = biased && (options.check_balance || options.record_steps);
  if (biased && options.bias.kappa() < state.kappa()) {
    throw Error(ErrorCode::InconsistentState, "bias defines fewer opinions than the state");
  }
  if (options.record_rows) trace.rows.push_back(make_row(0, state, 0.0));
  if (options.record_steps) trace.steps.initial_preferred = state.count(0);
  if (state.is_consensus()) {
    trace.consensus_time = 0;
    trace.winner = state.winner();
    trace.steps.terminal = true;
    return trace;
  }

  const double nd = static_cast<double>(n);
  const double ln_n = std::log(nd);
  std::optional<double> need_tau;  // b m / d_min, fixed by the first graph
  std::vector<std::vector<Opinion>> history;
  if (provider.uses_history()) history.emplace_back(state.assignment().begin(), state.assignment().end());

  const Graph* bound = nullptr;
  std::shared_ptr<const Graph> keep;
  std::vector<Change> changes;

  for (std::size_t t = 1; t <= options.max_rounds; ++t) {
    RoundGraph rg = provider.next(t, state, history);
    const Graph& g = *rg.graph;
    if (rg.graph.get() != bound) {
      if (provider.preserves_degrees()) check_degrees(provider, g);
      if (biased && !options.allow_nonregular && !g.is_regular()) {
        throw Error(ErrorCode::NonRegularGraph, "biased dynamics expect a regular graph");
      }
      state.rebind(g);
      bound = rg.graph.get();
      keep = rg.graph;
    }
    if (!need_tau) need_tau = options.thresholds.tau * static_cast<double>(g.edge_count()) / g.min_degree();

    std::optional<StepSchedule> schedule;
    if (steps_on) {
      schedule = decompose_round_into_steps(g, state);
      ++trace.steps_checked;
      trace.max_balance_gap = std::max(trace.max_balance_gap, schedule->max_gap);
      if (options.record_steps) trace.preferred_counts.push_back(state.count(0));
    }

    if (biased) {
      biased_voter_changes(g, state, options.bias, rng, changes);
    } else {
      standard_voter_changes(g, state, rng, changes);
    }
    state.apply(g, changes);
    state.set_round(t);

    if (schedule && options.record_steps) {
      mark_flips(*schedule, state);
      trace.steps.append(*schedule);
    }
    if (options.regeneration && biased && state.count(0) == 0) {
      const Change reset{0, 0};
      state.apply(g, std::span<const Change>(&reset, 1));
      ++trace.regenerations;
    }

    trace.rounds_run = t;
    trace.phi_sum += rg.phi;
    trace.phi_sq_sum += rg.phi * rg.phi;
    auto& th = trace.thresholds;
    if (!th.tau && trace.phi_sum >= *need_tau) th.tau = t;
    if (!th.tau_p && trace.phi_sq_sum >= options.thresholds.tau_p * nd * ln_n) th.tau_p = t;
    if (!th.tau_pp && trace.phi_sum >= options.thresholds.tau_pp * nd) th.tau_pp = t;
    if (!th.tau_ppp && trace.phi_sum >= options.thresholds.tau_ppp * ln_n) th.tau_ppp = t;

    if (options.record_rows) trace.rows.push_back(make_row(t, state, rg.phi));
    if (provider.uses_history()) history.emplace_back(state.assignment().begin(), state.assignment().end());
    if (state.is_consensus()) {
      trace.consensus_time = t;
      trace.winner = state.winner();
      trace.steps.terminal = true;
      return trace;
    }
  }
  trace.max_rounds_exceeded = true;
  return trace;
}

void write_trace_csv(std::ostream& out, const TraceRecord& trace, std::size_t kappa) {
  out << "t";
  for (std::size_t i = 0; i < kappa; ++i) out << ",c" << i;
  out << ",volS,psi,cut,phi,consensus\n";
  for (const auto& row : trace.rows) {
    out << row.t;
    for (std::size_t i = 0; i < kappa; ++i) out << ',' << (i < row.counts.size() ? row.counts[i] : 0);
    out << ',' << row.vol_s << ',' << row.psi << ',' << row.cut << ',' << row.phi << ',' << (row.consensus ? 1 : 0)
        << '\n';
  }
}

std::string trace_summary_json(const TraceRecord& trace, std::uint64_t seed) {
  auto opt = [](const std::optional<std::size_t>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["T"] = opt(trace.consensus_time);
  j["thresholds"] = {{"tau", opt(trace.thresholds.tau)},
                     {"tau_p", opt(trace.thresholds.tau_p)},
                     {"tau_pp", opt(trace.thresholds.tau_pp)},
                     {"tau_ppp", opt(trace.thresholds.tau_ppp)}};
  j["seed"] = seed;
  j["max_rounds_exceeded"] = trace.max_rounds_exceeded;
  j["rounds_run"] = trace.rounds_run;
  return j.dump(2);
}

}  // namespace voterlab
