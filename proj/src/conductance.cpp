#include "voterlab/conductance.hpp"

#include <bit>
#include <cmath>
#include <numeric>

#include "voterlab/errors.hpp"
#include "voterlab/rng.hpp"

namespace voterlab {

ConductanceResult conductance_exact(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n > kMaxExactConductanceNodes) {
    throw Error(ErrorCode::TooLargeForExact, "n=" + std::to_string(n) + " exceeds " +
                                                 std::to_string(kMaxExactConductanceNodes));
  }
  if (n < 2 || !g.is_connected()) {
    throw Error(ErrorCode::Disconnected, "conductance needs a connected graph with n >= 2");
  }
  const std::uint64_t m = g.edge_count();

  std::vector<char> in_u(n, 0);
  std::uint64_t vol = 0;
  std::uint64_t cut = 0;
  std::uint64_t best_cut = 1;
  std::uint64_t best_vol = 0;  // best ratio unset while zero
  std::uint64_t best_code = 0;

  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t i = 1; i < total; ++i) {
    const auto u = static_cast<Node>(std::countr_zero(i));
    std::uint64_t inside = 0;
    for (Node w : g.neighbors(u)) inside += static_cast<std::uint64_t>(in_u[w]);
    const std::uint64_t d = g.degree(u);
    if (in_u[u]) {
      in_u[u] = 0;
      vol -= d;
      cut = cut + 2 * inside - d;
    } else {
      in_u[u] = 1;
      vol += d;
      cut = cut + d - 2 * inside;
    }
    if (vol == 0 || vol > m) continue;
    if (best_vol == 0 || cut * best_vol < best_cut * vol) {
      best_cut = cut;
      best_vol = vol;
      best_code = i ^ (i >> 1);
    }
  }

  ConductanceResult r;
  r.mode = ConductanceMode::Exact;
  r.cut_numerator = best_cut;
  r.volume_denominator = best_vol;
  r.value = static_cast<double>(best_cut) / static_cast<double>(best_vol);
  r.lower = r.upper = r.value;
  for (Node u = 0; u < n; ++u) {
    if ((best_code >> u) & 1U) r.witness_set.push_back(u);
  }
  return r;
}

ConductanceResult conductance_cheeger_bounds(const Graph& g, double tol, std::size_t max_iterations) {
  const std::size_t n = g.node_count();
  if (n < 2 || !g.is_connected()) {
    throw Error(ErrorCode::Disconnected, "conductance needs a connected graph with n >= 2");
  }
  // Work with the symmetric form N = D^{-1/2} A D^{-1/2}; the lazy walk
  // (I + D^{-1}A)/2 is similar to (I + N)/2 and its top eigenvector is sqrt(d).
  std::vector<double> inv_sqrt_deg(n);
  std::vector<double> top(n);
  double two_m = 0.0;
  for (Node u = 0; u < n; ++u) two_m += g.degree(u);
  for (Node u = 0; u < n; ++u) {
    inv_sqrt_deg[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u)));
    top[u] = std::sqrt(static_cast<double>(g.degree(u)) / two_m);
  }
  auto deflate = [&](std::vector<double>& x) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += x[i] * top[i];
    for (std::size_t i = 0; i < n; ++i) x[i] -= dot * top[i];
  };
  auto normalize = [&](std::vector<double>& x) {
    double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    for (auto& v : x) v /= norm;
  };

  Rng rng(0x636865656765720AULL ^ n);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform() - 0.5;
  deflate(x);
  normalize(x);

  std::vector<double> y(n);
  double lambda = 0.0;
  std::size_t it = 0;
  for (; it < max_iterations; ++it) {
    for (Node u = 0; u < n; ++u) {
      double acc = 0.0;
      for (Node w : g.neighbors(u)) acc += x[w] * inv_sqrt_deg[w];
      y[u] = 0.5 * (x[u] + acc * inv_sqrt_deg[u]);
    }
    deflate(y);
    lambda = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);  // Rayleigh quotient, |x| = 1
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += (y[i] - lambda * x[i]) * (y[i] - lambda * x[i]);
    x.swap(y);
    normalize(x);
    if (std::sqrt(residual) < tol) break;
  }
  if (it == max_iterations) {
    throw Error(ErrorCode::NoConvergence, "power iteration did not reach tol=" + std::to_string(tol));
  }
  // Spectral gap of the non-lazy walk, mu = 1 - lambda2(D^{-1}A) = 2 (1 - lambda2(lazy)),
  // and the Cheeger sandwich mu/2 <= phi <= sqrt(2 mu).
  const double mu = 2.0 * std::max(0.0, 1.0 - lambda);
  ConductanceResult r;
  r.mode = ConductanceMode::CheegerBounds;
  r.lambda2 = lambda;
  r.lower = mu / 2.0;
  r.upper = std::min(1.0, std::sqrt(2.0 * mu));
  r.value = r.lower;
  r.iterations = it + 1;
  return r;
}

ConductanceResult conductance(const Graph& g, double tol) {
  if (g.node_count() <= kMaxExactConductanceNodes) return conductance_exact(g);
  return conductance_cheeger_bounds(g, tol);
}

double conductance_lower_bound(const ConductanceResult& r) {
  return r.mode == ConductanceMode::Exact ? r.value : r.lower;
}

}  // namespace voterlab
