#pragma once

#include <cstdint>
#include <vector>

#include "voterlab/graph.hpp"

namespace voterlab {

enum class ConductanceMode { Exact, CheegerBounds };

struct ConductanceResult {
  ConductanceMode mode = ConductanceMode::Exact;
  // Exact mode: value = cut_numerator / volume_denominator, witnessed by witness_set.
  double value = 0.0;
  std::uint64_t cut_numerator = 0;
  std::uint64_t volume_denominator = 0;
  std::vector<Node> witness_set;
  // Cheeger mode: lower <= phi <= upper, from the lazy-walk second eigenvalue.
  double lower = 0.0;
  double upper = 0.0;
  double lambda2 = 0.0;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kMaxExactConductanceNodes = 26;

// Minimum of cut(U)/vol(U) over all U with 0 < vol(U) <= m, by Gray-code
// enumeration with O(deg) incremental cut updates.
ConductanceResult conductance_exact(const Graph& g);

// [mu/2, min(1, sqrt(2 mu))] with mu = 1 - lambda2(D^-1 A) the spectral gap of
// the simple walk. lambda2 is found on the lazy walk (I + D^-1 A)/2 by power
// iteration deflated against the stationary vector; `lambda2` reports that
// lazy eigenvalue.
ConductanceResult conductance_cheeger_bounds(const Graph& g, double tol = 1e-9,
                                             std::size_t max_iterations = 1'000'000);

// Exact when n <= 26, Cheeger otherwise.
ConductanceResult conductance(const Graph& g, double tol = 1e-9);

// Lower bound usable as a schedule value: exact value or Cheeger lower end.
double conductance_lower_bound(const ConductanceResult& r);

}  // namespace voterlab
