#include "voterlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <Eigen/Sparse>
#include <gmpxx.h>
#include <json.hpp>

#include "voterlab/errors.hpp"

namespace voterlab {

namespace {

constexpr std::size_t kMaxTransitions = 12'000'000;
constexpr std::size_t kMaxPartitionStates = 200'000;
constexpr double kResidualTolerance = 1e-10;

template <class Scalar>
Scalar ratio(std::uint32_t num, std::uint32_t den) {
  if constexpr (std::is_same_v<Scalar, mpq_class>) {
    mpq_class q(num, den);
    q.canonicalize();
    return q;
  } else {
    return static_cast<double>(num) / static_cast<double>(den);
  }
}

// Exact rational solve of A X = B (every column of B). Rows are scaled to
// integers, the system is solved modulo a run of 31-bit primes and the Cramer
// pair (D, Y) with A Y = D B is rebuilt by CRT. The run stops once the CRT
// values are stable and A Y = D B holds over the integers, which certifies
// X = Y / D.
class ModPrime {
 public:
  explicit ModPrime(std::uint64_t p) : p_(p), m_(~std::uint64_t{0} / p) {}
  std::uint64_t p() const { return p_; }
  std::uint64_t reduce(std::uint64_t x) const {  // x < 2^64
    const auto q = static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * m_) >> 64);
    std::uint64_t r = x - q * p_;
    while (r >= p_) r -= p_;
    return r;
  }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const { return reduce(a * b); }
  std::uint64_t inv(std::uint64_t a) const {
    std::uint64_t r = 1, e = p_ - 2;
    for (; e; e >>= 1, a = mul(a, a)) {
      if (e & 1) r = mul(r, a);
    }
    return r;
  }

 private:
  std::uint64_t p_;
  std::uint64_t m_;
};

// Residues of D and Y = D X modulo p; empty when A is singular mod p.
std::optional<std::vector<std::uint64_t>> cramer_mod(const std::vector<std::vector<mpz_class>>& a,
                                                     const std::vector<std::vector<mpz_class>>& b, const ModPrime& mp) {
  const std::size_t n = a.size(), cols = b.empty() ? 0 : b[0].size(), w = n + cols;
  const std::uint64_t p = mp.p();
  std::vector<std::uint64_t> m(n * w);
  auto mod = [&](const mpz_class& v) -> std::uint64_t { return mpz_fdiv_ui(v.get_mpz_t(), p); };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i * w + j] = sgn(a[i][j]) ? mod(a[i][j]) : 0;
    for (std::size_t c = 0; c < cols; ++c) m[i * w + n + c] = mod(b[i][c]);
  }
  std::uint64_t det = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    while (piv < n && m[piv * w + k] == 0) ++piv;
    if (piv == n) return std::nullopt;
    if (piv != k) {
      std::swap_ranges(m.begin() + static_cast<std::ptrdiff_t>(k * w), m.begin() + static_cast<std::ptrdiff_t>(k * w + w),
                       m.begin() + static_cast<std::ptrdiff_t>(piv * w));
      det = p - det;
    }
    const std::uint64_t pv = m[k * w + k];
    det = mp.mul(det, pv);
    const std::uint64_t iv = mp.inv(pv);
    for (std::size_t j = k; j < w; ++j) m[k * w + j] = mp.mul(m[k * w + j], iv);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t f = m[i * w + k];
      if (i == k || f == 0) continue;
      const std::uint64_t nf = p - f;
      std::uint64_t* row = &m[i * w];
      const std::uint64_t* prow = &m[k * w];
      for (std::size_t j = k; j < w; ++j) {
        if (prow[j]) row[j] = mp.reduce(row[j] + nf * prow[j]);
      }
    }
  }
  std::vector<std::uint64_t> out(1 + n * cols);
  out[0] = det;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < cols; ++c) out[1 + i * cols + c] = mp.mul(m[i * w + n + c], det);
  }
  return out;
}

std::vector<std::vector<mpq_class>> solve_rational(const std::vector<std::vector<mpq_class>>& aq,
                                                   const std::vector<std::vector<mpq_class>>& bq) {
  const std::size_t n = aq.size(), cols = bq.empty() ? 0 : bq[0].size();
  std::vector<std::vector<mpz_class>> a(n, std::vector<mpz_class>(n)), b(n, std::vector<mpz_class>(cols));
  for (std::size_t i = 0; i < n; ++i) {
    mpz_class l = 1;
    for (const auto& v : aq[i]) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.get_den_mpz_t());
    for (const auto& v : bq[i]) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.get_den_mpz_t());
    for (std::size_t j = 0; j < n; ++j) a[i][j] = l / aq[i][j].get_den() * aq[i][j].get_num();
    for (std::size_t c = 0; c < cols; ++c) b[i][c] = l / bq[i][c].get_den() * bq[i][c].get_num();
  }
  // Hadamard-type bound on |D| and |Y|: stop with an error past it.
  double log2_bound = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    mpz_class sq = 0;
    for (const auto& v : a[i]) sq += v * v;
    for (const auto& v : b[i]) sq += v * v;
    log2_bound += 0.5 * static_cast<double>(mpz_sizeinbase(sq.get_mpz_t(), 2));
  }

  const std::size_t vals = 1 + n * cols;
  std::vector<mpz_class> crt(vals, 0);
  mpz_class modulus = 1;
  mpz_class prime = mpz_class(1) << 31;
  auto lift = [&](const mpz_class& v) { return v > modulus / 2 ? mpz_class(v - modulus) : v; };
  std::size_t singular_run = 0;
  while (true) {
    do {
      prime -= 1;
    } while (mpz_probab_prime_p(prime.get_mpz_t(), 30) == 0);
    const ModPrime mp(prime.get_ui());
    const auto res = cramer_mod(a, b, mp);
    if (!res) {
      // A nonsingular integer matrix is singular modulo only finitely many small-ish primes.
      if (++singular_run > 16) throw Error(ErrorCode::InconsistentState, "singular absorption system");
      continue;
    }
    singular_run = 0;
    // Incremental CRT: v += M * ((r - v) M^{-1} mod p).
    const std::uint64_t minv = mp.inv(mpz_fdiv_ui(modulus.get_mpz_t(), mp.p()));
    bool stable = true;
    for (std::size_t k = 0; k < vals; ++k) {
      const std::uint64_t cur = mpz_fdiv_ui(crt[k].get_mpz_t(), mp.p());
      const std::uint64_t diff = ((*res)[k] + mp.p() - cur) % mp.p();
      if (diff == 0) continue;
      stable = false;
      crt[k] += modulus * mpz_class(static_cast<unsigned long>(mp.mul(diff, minv)));
    }
    modulus *= prime;
    if (stable) {
      const mpz_class d = lift(crt[0]);
      if (sgn(d) != 0) {
        std::vector<mpz_class> y(n * cols);
        for (std::size_t k = 0; k < n * cols; ++k) y[k] = lift(crt[1 + k]);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
          for (std::size_t c = 0; c < cols && ok; ++c) {
            mpz_class acc = 0;
            for (std::size_t j = 0; j < n; ++j) {
              if (sgn(a[i][j])) acc += a[i][j] * y[j * cols + c];
            }
            ok = acc == d * b[i][c];
          }
        }
        if (ok) {
          std::vector<std::vector<mpq_class>> x(n, std::vector<mpq_class>(cols));
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < cols; ++c) {
              x[i][c] = mpq_class(y[i * cols + c], d);
              x[i][c].canonicalize();
            }
          }
          return x;
        }
      }
    }
    if (static_cast<double>(mpz_sizeinbase(modulus.get_mpz_t(), 2)) > log2_bound + 64.0) {
      throw Error(ErrorCode::InconsistentState, "singular absorption system");
    }
  }
}

struct SparseSolve {
  std::vector<std::vector<double>> x;  // per column
  double residual = 0.0;
};

// Solves (I - Q) x = b for each column with Q given as triplets over transient states.
SparseSolve solve_sparse(std::size_t n, const std::vector<Eigen::Triplet<double>>& q,
                         const std::vector<std::vector<double>>& rhs) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(q.size() + n);
  for (std::size_t i = 0; i < n; ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
  for (const auto& e : q) t.emplace_back(e.row(), e.col(), -e.value());
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "sparse LU factorisation failed");
  SparseSolve out;
  for (const auto& col : rhs) {
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd x = lu.solve(b);
    const double res = (a * x - b).cwiseAbs().maxCoeff();
    out.residual = std::max(out.residual, res);
    out.x.emplace_back(x.data(), x.data() + x.size());
  }
  if (out.residual > kResidualTolerance) {
    throw Error(ErrorCode::NoConvergence, "residual " + std::to_string(out.residual) + " above 1e-10");
  }
  return out;
}

// Two-opinion chain: from `mask` (bit u set = node u holds opinion 0) every
// boundary node flips independently with probability lambda_u / (2 d_u).
template <class Scalar, class Visit>
void for_each_flip_set(const Graph& g, std::uint32_t mask, Visit&& visit) {
  std::vector<Node> nodes;
  std::vector<Scalar> p;
  std::vector<Scalar> q;
  for (Node u = 0; u < g.node_count(); ++u) {
    const bool mine = (mask >> u) & 1U;
    std::uint32_t lam = 0;
    for (Node w : g.neighbors(u)) lam += static_cast<bool>((mask >> w) & 1U) != mine ? 1U : 0U;
    if (lam == 0) continue;
    nodes.push_back(u);
    p.push_back(ratio<Scalar>(lam, 2 * g.degree(u)));
    q.push_back(Scalar(1) - p.back());
  }
  const std::size_t b = nodes.size();
  for (std::uint32_t f = 0; f < (1U << b); ++f) {
    Scalar prob(1);
    std::uint32_t flips = 0;
    for (std::size_t i = 0; i < b; ++i) {
      if ((f >> i) & 1U) {
        prob *= p[i];
        flips |= 1U << nodes[i];
      } else {
        prob *= q[i];
      }
    }
    visit(mask ^ flips, prob);
  }
}

std::size_t boundary_size(const Graph& g, std::uint32_t mask) {
  std::size_t b = 0;
  for (Node u = 0; u < g.node_count(); ++u) {
    const bool mine = (mask >> u) & 1U;
    for (Node w : g.neighbors(u)) {
      if (static_cast<bool>((mask >> w) & 1U) != mine) {
        ++b;
        break;
      }
    }
  }
  return b;
}

std::string to_string(const mpq_class& q) { return q.get_str(); }

}  // namespace

FixationTable fixation_table(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n > kMaxFixationNodes) {
    throw Error(ErrorCode::TooLarge, "fixation oracle handles n <= 14, got " + std::to_string(n));
  }
  if (n == 0) throw Error(ErrorCode::InvalidParams, "empty graph");
  const std::uint32_t full = n == 32 ? ~0U : (1U << n) - 1;
  const std::size_t states = std::size_t{1} << n;
  FixationTable table;
  table.prevail.assign(states, 0.0);
  table.time.assign(states, 0.0);
  table.prevail[full] = 1.0;

  // Transient states are all masks except 0 and full, indexed mask - 1.
  const std::size_t transient = states >= 2 ? states - 2 : 0;
  if (transient == 0) return table;
  if (!g.is_connected()) throw Error(ErrorCode::Disconnected, "fixation needs a connected graph");

  std::size_t transitions = 0;
  for (std::uint32_t s = 1; s < full; ++s) transitions += std::size_t{1} << boundary_size(g, s);
  if (transitions > kMaxTransitions) {
    throw Error(ErrorCode::TooLarge, std::to_string(transitions) + " transitions exceed the solver budget");
  }

  if (n <= kMaxRationalNodes) {
    std::vector<std::vector<mpq_class>> a(transient, std::vector<mpq_class>(transient));
    std::vector<std::vector<mpq_class>> b(transient, std::vector<mpq_class>(2));
    for (std::uint32_t s = 1; s < full; ++s) {
      auto& row = a[s - 1];
      row[s - 1] += 1;
      b[s - 1][1] = 1;
      for_each_flip_set<mpq_class>(g, s, [&](std::uint32_t next, const mpq_class& p) {
        if (next == full) {
          b[s - 1][0] += p;
        } else if (next != 0) {
          row[next - 1] -= p;
        }
      });
    }
    auto x = solve_rational(std::move(a), std::move(b));
    table.rational = true;
    table.prevail_exact.assign(states, "0");
    table.prevail_exact[full] = "1";
    for (std::uint32_t s = 1; s < full; ++s) {
      table.prevail[s] = x[s - 1][0].get_d();
      table.time[s] = x[s - 1][1].get_d();
      table.prevail_exact[s] = to_string(x[s - 1][0]);
    }
    return table;
  }

  std::vector<Eigen::Triplet<double>> q;
  q.reserve(transitions);
  std::vector<std::vector<double>> rhs(2, std::vector<double>(transient, 0.0));
  for (std::uint32_t s = 1; s < full; ++s) {
    rhs[1][s - 1] = 1.0;
    for_each_flip_set<double>(g, s, [&](std::uint32_t next, double p) {
      if (next == full) {
        rhs[0][s - 1] += p;
      } else if (next != 0) {
        q.emplace_back(static_cast<int>(s - 1), static_cast<int>(next - 1), p);
      }
    });
  }
  auto sol = solve_sparse(transient, q, rhs);
  table.residual = sol.residual;
  for (std::uint32_t s = 1; s < full; ++s) {
    table.prevail[s] = sol.x[0][s - 1];
    table.time[s] = sol.x[1][s - 1];
  }
  return table;
}

ChainSolution exact_fixation_probability(const Graph& g, const OpinionState& init) {
  if (init.kappa() != 2) throw Error(ErrorCode::InvalidParams, "fixation oracle needs two opinions");
  if (init.node_count() != g.node_count()) throw Error(ErrorCode::InconsistentState, "state/graph size mismatch");
  if (g.node_count() > kMaxFixationNodes) {
    throw Error(ErrorCode::TooLarge, "fixation oracle handles n <= 14");
  }
  std::uint32_t mask = 0;
  for (Node u = 0; u < g.node_count(); ++u) {
    if (init.opinion(u) == 0) mask |= 1U << u;
  }
  const FixationTable table = fixation_table(g);
  ChainSolution out;
  const double p = table.prevail[mask];
  out.absorption_probabilities = {p, 1.0 - p};
  out.expected_absorption_time = table.time[mask];
  out.state_space_size = table.prevail.size();
  out.rational = table.rational;
  out.residual = table.residual;
  if (table.rational) out.probability_exact = table.prevail_exact[mask];
  return out;
}

namespace {

using PartitionKey = std::uint64_t;

// Relabels opinions by first occurrence and packs 4 bits per node.
PartitionKey canonical(std::span<const Opinion> a, std::vector<Opinion>& relabel_scratch) {
  const Opinion top = a.empty() ? 0 : *std::max_element(a.begin(), a.end());
  relabel_scratch.assign(static_cast<std::size_t>(top) + 1, static_cast<Opinion>(-1));
  Opinion next = 0;
  PartitionKey key = 0;
  for (std::size_t u = 0; u < a.size(); ++u) {
    auto& r = relabel_scratch[a[u]];
    if (r == static_cast<Opinion>(-1)) r = next++;
    key |= static_cast<PartitionKey>(r) << (4 * u);
  }
  return key;
}

std::vector<Opinion> unpack(PartitionKey key, std::size_t n) {
  std::vector<Opinion> a(n);
  for (std::size_t u = 0; u < n; ++u) a[u] = static_cast<Opinion>((key >> (4 * u)) & 0xFU);
  return a;
}

bool is_consensus_key(PartitionKey key, std::size_t n) {
  for (std::size_t u = 0; u < n; ++u) {
    if (((key >> (4 * u)) & 0xFU) != 0) return false;
  }
  return true;
}

// Successor partitions of one lazy standard round with their probabilities.
template <class Scalar, class Visit>
void for_each_successor(const Graph& g, const std::vector<Opinion>& a, Visit&& visit) {
  const std::size_t n = a.size();
  struct Option {
    Opinion o;
    Scalar p;
  };
  std::vector<std::vector<Option>> options(n);
  std::vector<Node> movers;
  for (Node u = 0; u < n; ++u) {
    const auto d = g.degree(u);
    std::map<Opinion, std::uint32_t> tally;
    for (Node w : g.neighbors(u)) ++tally[a[w]];
    std::uint32_t same = tally.count(a[u]) ? tally[a[u]] : 0;
    options[u].push_back({a[u], ratio<Scalar>(d + same, 2 * d)});
    for (auto [o, c] : tally) {
      if (o != a[u]) options[u].push_back({o, ratio<Scalar>(c, 2 * d)});
    }
    if (options[u].size() > 1) movers.push_back(u);
  }
  std::vector<Opinion> next = a;
  std::vector<Opinion> scratch;
  std::vector<std::size_t> idx(movers.size(), 0);
  while (true) {
    Scalar prob(1);
    for (std::size_t i = 0; i < movers.size(); ++i) {
      const auto& opt = options[movers[i]][idx[i]];
      next[movers[i]] = opt.o;
      prob *= opt.p;
    }
    visit(canonical(next, scratch), prob);
    std::size_t i = 0;
    while (i < movers.size() && ++idx[i] == options[movers[i]].size()) idx[i++] = 0;
    if (i == movers.size()) break;
  }
}

}  // namespace

ChainSolution exact_expected_consensus_time(const Graph& g, const OpinionState& init,
                                            std::size_t rational_state_limit) {
  const std::size_t n = g.node_count();
  if (n > kMaxConsensusNodes) {
    throw Error(ErrorCode::TooLarge, "consensus-time oracle handles n <= 12, got " + std::to_string(n));
  }
  if (init.node_count() != n) throw Error(ErrorCode::InconsistentState, "state/graph size mismatch");
  ChainSolution out;
  out.absorption_probabilities = {1.0};
  std::vector<Opinion> scratch;
  const PartitionKey start = canonical(init.assignment(), scratch);
  if (is_consensus_key(start, n)) {
    out.state_space_size = 1;
    out.rational = true;
    out.time_exact = "0";
    out.probability_exact = "1";
    return out;
  }
  if (!g.is_connected()) throw Error(ErrorCode::Disconnected, "consensus time needs a connected graph");

  // Breadth-first discovery of transient partitions; transitions kept as doubles.
  std::unordered_map<PartitionKey, std::size_t> id;
  std::vector<PartitionKey> keys;
  std::vector<Eigen::Triplet<double>> q;
  id.emplace(start, 0);
  keys.push_back(start);
  std::size_t transitions = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto a = unpack(keys[i], n);
    for_each_successor<double>(g, a, [&](PartitionKey next, double p) {
      ++transitions;
      if (is_consensus_key(next, n)) return;
      auto [it, fresh] = id.emplace(next, keys.size());
      if (fresh) keys.push_back(next);
      q.emplace_back(static_cast<int>(i), static_cast<int>(it->second), p);
    });
    if (keys.size() > kMaxPartitionStates || transitions > kMaxTransitions) {
      throw Error(ErrorCode::TooLarge, "partition chain exceeds the solver budget");
    }
  }
  const std::size_t m = keys.size();
  out.state_space_size = m + 1;

  if (n <= kMaxRationalNodes && m <= rational_state_limit) {
    std::vector<std::vector<mpq_class>> a(m, std::vector<mpq_class>(m));
    std::vector<std::vector<mpq_class>> b(m, std::vector<mpq_class>(1, mpq_class(1)));
    for (std::size_t i = 0; i < m; ++i) {
      a[i][i] += 1;
      for_each_successor<mpq_class>(g, unpack(keys[i], n), [&](PartitionKey next, const mpq_class& p) {
        if (is_consensus_key(next, n)) return;
        a[i][id.at(next)] -= p;
      });
    }
    auto x = solve_rational(std::move(a), std::move(b));
    out.rational = true;
    out.expected_absorption_time = x[0][0].get_d();
    out.time_exact = to_string(x[0][0]);
    out.probability_exact = "1";
    return out;
  }
  auto sol = solve_sparse(m, q, {std::vector<double>(m, 1.0)});
  out.residual = sol.residual;
  out.expected_absorption_time = sol.x[0][0];
  return out;
}

OneStepDistribution exact_one_step_distribution(const Graph& g, const OpinionState& state) {
  if (state.kappa() != 2) throw Error(ErrorCode::InvalidParams, "one-step oracle needs two opinions");
  state.validate(g);
  const auto boundary = state.boundary();
  if (boundary.size() > kMaxOneStepBoundary) {
    throw Error(ErrorCode::BoundaryTooLarge, std::to_string(boundary.size()) + " boundary nodes (limit 30)");
  }
  OneStepDistribution out;
  out.total_volume = state.total_volume();
  out.current_volume = state.volume(0);
  const std::uint64_t two_m = out.total_volume;
  out.pmf.assign(two_m + 1, 0.0);
  out.pmf[out.current_volume] = 1.0;
  std::vector<double> next(two_m + 1);
  for (Node u : boundary) {
    const std::uint32_t d = g.degree(u);
    const double p = static_cast<double>(state.discordance(u)) / (2.0 * d);
    const bool holds_zero = state.opinion(u) == 0;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::uint64_t v = 0; v <= two_m; ++v) {
      const double w = out.pmf[v];
      if (w == 0.0) continue;
      next[v] += w * (1.0 - p);
      next[holds_zero ? v - d : v + d] += w * p;
    }
    out.pmf.swap(next);
  }
  auto psi_of = [two_m](std::uint64_t v) { return std::sqrt(static_cast<double>(std::min(v, two_m - v))); };
  out.psi = psi_of(out.current_volume);
  for (std::uint64_t v = 0; v <= two_m; ++v) {
    out.expected_volume += out.pmf[v] * static_cast<double>(v);
    out.expected_psi_next += out.pmf[v] * psi_of(v);
  }
  return out;
}

std::string DriftCertificate::state_bits() const {
  std::string s;
  s.reserve(state.size());
  for (Opinion o : state) s += static_cast<char>('0' + o);
  return s;
}

DriftCertificate verify_drift_upper(const Graph& g, const OpinionState& state) {
  if (state.kappa() != 2) throw Error(ErrorCode::InvalidParams, "drift check needs two opinions");
  if (state.is_consensus()) throw Error(ErrorCode::PreconditionViolation, "s_t is empty in a consensus state");
  const auto dist = exact_one_step_distribution(g, state);
  const Opinion s = state.minority_opinion();
  double sum_s = 0.0;
  double sum_v = 0.0;
  for (Node u : state.boundary()) {
    const double term = static_cast<double>(state.discordance(u)) * g.degree(u);
    sum_v += term;
    if (state.opinion(u) == s) sum_s += term;
  }
  DriftCertificate c;
  c.state.assign(state.assignment().begin(), state.assignment().end());
  c.psi = dist.psi;
  c.exact_expected_psi_next = dist.expected_psi_next;
  const double psi3 = c.psi * c.psi * c.psi;
  c.bound_upper = c.psi - sum_s / (32.0 * psi3);
  c.statement_upper = c.psi - sum_v / (32.0 * psi3);
  constexpr double tol = 1e-12;
  c.satisfied = c.exact_expected_psi_next <= c.bound_upper + tol;
  c.statement_satisfied = c.exact_expected_psi_next <= c.statement_upper + tol;
  return c;
}

DriftCertificate verify_drift_lower(const Graph& g, const OpinionState& state, double c_const, double phi) {
  if (state.kappa() != 2) throw Error(ErrorCode::InvalidParams, "drift check needs two opinions");
  if (!g.is_regular()) throw Error(ErrorCode::NonRegularGraph, "lower drift bound assumes a regular graph");
  if (state.is_consensus()) throw Error(ErrorCode::PreconditionViolation, "s_t is empty in a consensus state");
  const double d = g.max_degree();
  const double n = static_cast<double>(g.node_count());
  const auto cut = static_cast<double>(state.discordant_edges());
  if (cut > c_const * phi * d * n) {
    throw Error(ErrorCode::PreconditionCutTooLarge,
                "cut " + std::to_string(cut) + " > c phi d n = " + std::to_string(c_const * phi * d * n));
  }
  const auto dist = exact_one_step_distribution(g, state);
  DriftCertificate c;
  c.state.assign(state.assignment().begin(), state.assignment().end());
  c.psi = dist.psi;
  c.exact_expected_psi_next = dist.expected_psi_next;
  c.bound_lower = c.psi - c_const * phi * d / c.psi;
  c.satisfied = c.exact_expected_psi_next >= *c.bound_lower - 1e-12;
  return c;
}

std::string certificate_json(const DriftCertificate& cert, bool lower) {
  nlohmann::json j;
  j["state_bits"] = cert.state_bits();
  j["exact"] = cert.exact_expected_psi_next;
  j["bound"] = lower && cert.bound_lower ? *cert.bound_lower : cert.bound_upper;
  j["satisfied"] = cert.satisfied;
  return j.dump();
}

namespace {

void validate_laws(const std::vector<Law>& laws) {
  for (const auto& law : laws) {
    if (law.empty()) throw Error(ErrorCode::InvalidParams, "empty law");
    double total = 0.0;
    for (auto [v, p] : law) {
      if (p < 0.0) throw Error(ErrorCode::InvalidParams, "negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidParams, "probabilities do not sum to 1");
  }
}

std::size_t product_atoms(const std::vector<Law>& laws) {
  std::size_t atoms = 1;
  for (const auto& law : laws) {
    if (atoms > kMaxProductAtoms / law.size()) {
      throw Error(ErrorCode::SupportTooLarge, "joint support exceeds 10^6 atoms");
    }
    atoms *= law.size();
  }
  return atoms;
}

// Enumerates every joint outcome and reports (sum, probability).
template <class Visit>
void enumerate_product(const std::vector<Law>& laws, Visit&& visit) {
  std::vector<std::size_t> idx(laws.size(), 0);
  while (true) {
    double sum = 0.0;
    double prob = 1.0;
    for (std::size_t i = 0; i < laws.size(); ++i) {
      sum += laws[i][idx[i]].first;
      prob *= laws[i][idx[i]].second;
    }
    visit(sum, prob);
    std::size_t i = 0;
    while (i < laws.size() && ++idx[i] == laws[i].size()) idx[i++] = 0;
    if (i == laws.size()) break;
  }
}

std::map<double, double> sum_law(const std::vector<Law>& laws) {
  std::map<double, double> out;
  enumerate_product(laws, [&](double s, double p) { out[s] += p; });
  return out;
}

}  // namespace

MomentReport third_moment_identity(const std::vector<Law>& laws) {
  validate_laws(laws);
  MomentReport r;
  r.atoms = product_atoms(laws);
  double mean = 0.0;
  double scale = 0.0;
  for (const auto& law : laws) {
    double e1 = 0.0;
    double e2 = 0.0;
    double e3 = 0.0;
    for (auto [v, p] : law) {
      e1 += p * v;
      e2 += p * v * v;
      e3 += p * v * v * v;
    }
    mean += e1;
    scale += std::abs(e1);
    r.formula += e3 - 3.0 * e2 * e1 + 2.0 * e1 * e1 * e1;
  }
  if (std::abs(mean) > 1e-12 * std::max(1.0, scale)) {
    throw Error(ErrorCode::NonzeroMean, "sum of means is " + std::to_string(mean));
  }
  enumerate_product(laws, [&](double s, double p) { r.brute_force += p * s * s * s; });
  r.max_abs_deviation = std::abs(r.brute_force - r.formula);
  return r;
}

TestFunction sqrt_shift(double a) {
  std::ostringstream name;
  name << "sqrt(" << a << "+x)";
  return {name.str(), [a](double x) { return std::sqrt(std::max(a + x, 0.0)); }};
}
TestFunction neg_square() {
  return {"-x^2", [](double x) { return -x * x; }};
}
TestFunction min_cap(double k) {
  std::ostringstream name;
  name << "min(x," << k << ")";
  return {name.str(), [k](double x) { return std::min(x, k); }};
}
TestFunction linear(double slope) {
  std::ostringstream name;
  name << slope << "*x";
  return {name.str(), [slope](double x) { return slope * x; }};
}
TestFunction square() {
  return {"x^2", [](double x) { return x * x; }};
}

bool DominanceReport::all_hold() const {
  return std::all_of(results.begin(), results.end(),
                     [](const DominanceResult& r) { return !r.concave_on_support || r.holds; });
}

DominanceReport concave_dominance_check(const std::vector<Law>& x_laws, const std::vector<Law>& y_laws,
                                        const std::vector<TestFunction>& functions) {
  validate_laws(x_laws);
  validate_laws(y_laws);
  DominanceReport report;
  report.atoms = product_atoms(x_laws) + product_atoms(y_laws);
  const auto sx = sum_law(x_laws);
  const auto sy = sum_law(y_laws);
  std::vector<double> support;
  for (const auto& [v, p] : sx) support.push_back(v);
  for (const auto& [v, p] : sy) support.push_back(v);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());

  for (const auto& tf : functions) {
    DominanceResult r;
    r.name = tf.name;
    for (const auto& [v, p] : sx) r.ex += p * tf.f(v);
    for (const auto& [v, p] : sy) r.ey += p * tf.f(v);
    // Discrete concavity on the joint support: chord slopes must not increase.
    r.concave_on_support = true;
    for (std::size_t i = 1; i + 1 < support.size(); ++i) {
      const double s1 = (tf.f(support[i]) - tf.f(support[i - 1])) / (support[i] - support[i - 1]);
      const double s2 = (tf.f(support[i + 1]) - tf.f(support[i])) / (support[i + 1] - support[i]);
      if (s2 > s1 + 1e-9 * std::max(1.0, std::abs(s1))) {
        r.concave_on_support = false;
        break;
      }
    }
    r.holds = r.ex <= r.ey + 1e-12 * std::max(1.0, std::abs(r.ey));
    report.results.push_back(r);
  }
  return report;
}

DominanceLaws dominance_laws(const Graph& g, const OpinionState& state) {
  if (state.kappa() != 2) throw Error(ErrorCode::InvalidParams, "dominance laws need two opinions");
  const Opinion s = state.minority_opinion();
  DominanceLaws out;
  out.minority_volume = static_cast<double>(state.volume(s));
  for (Node u : state.boundary()) {
    const double d = g.degree(u);
    const double lam = state.discordance(u);
    const double p = lam / (2.0 * d);
    if (state.opinion(u) == s) {
      out.x.push_back({{-d, p}, {0.0, 1.0 - p}});
      out.y.push_back({{-d, p}, {0.0, 1.0 - p}});
    } else {
      out.x.push_back({{d, p}, {0.0, 1.0 - p}});
      out.y.push_back({{lam, 0.5}, {0.0, 0.5}});
    }
  }
  return out;
}

}  // namespace voterlab
