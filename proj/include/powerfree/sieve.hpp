#pragma once

// Moebius decomposition of N_r(Y, f; H) and prediction-vs-count reports.

#include <cstdint>
#include <optional>
#include <vector>

#include "powerfree/enumerate.hpp"
#include "powerfree/euler.hpp"
#include "powerfree/forms.hpp"
#include "powerfree/parallel.hpp"

namespace powerfree {

struct SieveTerm {
  std::uint64_t k = 0;
  int mu = 0;
  std::uint64_t U = 0;  // #{x : 0 != f(x) = 0 mod k^r}
};

struct SieveBreakdown {
  std::int64_t H = 0;
  int r = 0;
  long double delta = 0;
  std::uint64_t k_split = 0;  // largest k <= H^delta
  std::uint64_t K_total = 0;  // largest k with k^r <= C_f H^d
  std::int64_t N1 = 0;        // sum_{k <= k_split} mu(k) U_k
  std::uint64_t N2 = 0;       // sum_{k_split < k <= K_total} |mu(k)| U_k
  std::int64_t signed_tail = 0;
  std::uint64_t N_direct = 0;
  bool identity_ok = false;   // N_direct == N1 + signed_tail
  std::uint64_t tail_square_bound = 0;  // same tail with k^2 in place of k^r
  bool tail_dominated = false;          // N2 <= tail_square_bound
  std::vector<SieveTerm> terms;         // square-free k <= K_total
};

/// Largest k >= 1 with k^r <= C_f * max(H, 1)^d.
std::uint64_t sieve_cutoff(const IntPolynomial& f, int r, std::int64_t H);

/// `delta` must be positive; the customary default is d / (2r). Values at or
/// beyond the vanishing cutoff put every term in N1.
SieveBreakdown mobius_sieve_count(const AffineQuadric& Y, const IntPolynomial& f, int r, std::int64_t H,
                                  long double delta, const ParallelContext& ctx = {});
SieveBreakdown mobius_sieve_count(const PointList& points, const IntPolynomial& f, int r, std::int64_t H,
                                  long double delta, const ParallelContext& ctx = {});

struct ReportRow {
  std::int64_t H = 0;
  std::uint64_t points = 0;     // #Y(Z) in the box
  std::uint64_t N = 0;          // N_r(Y, f; H)
  long double mu_inf = 0;
  long double prediction = 0;
  std::optional<long double> ratio;   // absent when the prediction is 0
  std::vector<std::uint64_t> N_by_component;  // two-sheeted Y only
};

struct ExperimentReport {
  int r = 0;
  SeriesEstimate series;
  std::vector<ReportRow> rows;
  int components = 1;
  /// Prediction positive at every H while no point is counted.
  bool local_global_failure = false;
  /// The last ratio sits within 0.1 of an integer >= 2.
  bool near_integer_ratio = false;
};

ExperimentReport compare_report(const AffineQuadric& Y, const IntPolynomial& f, int r,
                                const std::vector<std::int64_t>& H_list, std::uint64_t P_max,
                                const ParallelContext& ctx = {});

struct ProfileRow {
  int r = 0;
  std::uint64_t N = 0;
};

struct DensityProfile {
  std::int64_t H = 0;
  std::uint64_t points = 0;
  std::vector<ProfileRow> rows;  // in the order of r_list
  std::optional<int> smallest_nonzero_r;
  bool monotone = true;  // N_r <= N_r' whenever r < r'
};

DensityProfile rfree_density_profile(const AffineQuadric& Y, const IntPolynomial& f, std::int64_t H,
                                     const std::vector<int>& r_list, const ParallelContext& ctx = {});

}  // namespace powerfree
