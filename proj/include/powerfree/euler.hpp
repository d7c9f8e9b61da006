#pragma once

// Ordered Euler products of local densities and the congruence sum S.

#include <cstdint>
#include <optional>
#include <vector>

#include "powerfree/forms.hpp"
#include "powerfree/localdens.hpp"
#include "powerfree/parallel.hpp"

namespace powerfree {

struct SeriesFactor {
  std::uint64_t p = 0;
  bool good = false;
  ExactRational density;        // mu_p(Y, f, r)
  ExactRational point_density;  // mu_p(Y)
  DensityStatus status = DensityStatus::stabilized;
};

struct SeriesEstimate {
  ExactRational partial;  // product over p <= P_max, in increasing order of p
  Real80 partial_real = 0;
  std::uint64_t P_max = 0;
  long double C_meas = 0;          // max over good p of p^2 |factor / mu_p(Y) - 1|
  long double tail_log_bound = 0;  // C_meas * sum_{m > P_max} m^-2; heuristic
  bool positive = false;
  bool conditionally_convergent = false;  // n = 3
  bool exact = true;                      // false when some factor was capped
  std::optional<std::uint64_t> zero_at;   // first prime with a zero factor
  std::vector<SeriesFactor> factors;
};

SeriesEstimate singular_series(const AffineQuadric& Y, const IntPolynomial& f, int r, std::uint64_t P_max,
                               const ParallelContext& ctx = {});

/// Sum over square-free k <= K built from primes <= P of
/// mu(k) * sum_{xi mod k^r on Y, f(xi) = 0} prod_{p <= P} mu_p(Y; xi; k^r).
/// By the Chinese remainder theorem the inner sum is
/// prod_{p | k} M_p * prod_{p <= P, p not dividing k} A_p with A_p = mu_p(Y)
/// and M_p the density of p^r | f; this is how it is evaluated. Once K
/// exceeds the product of the primes up to P it equals prod (A_p - M_p).
ExactRational congruence_sum_S(const AffineQuadric& Y, const IntPolynomial& f, int r, std::uint64_t K,
                               std::uint64_t P, const ParallelContext& ctx = {});

/// partial_real * mu_inf(Y; H).
long double predicted_main_term(const SeriesEstimate& series, const AffineQuadric& Y, std::int64_t H,
                                const ParallelContext& ctx = {});
long double predicted_main_term(const AffineQuadric& Y, const IntPolynomial& f, int r, std::int64_t H,
                                std::uint64_t P_max, const ParallelContext& ctx = {});

}  // namespace powerfree
