#pragma once

// Congruence counts rho(l), rho(l; c) and p-adic densities of Y(Z_p).
//
// Counts at prime powers are obtained by lifting residue classes one level at
// a time; from level 1 on the constraints are linear in the new digit, so the
// lifts of a class form an affine subspace of F_p^n. Densities are computed on
// a tree of residue classes: a class x mod p^k whose gradient valuation v is
// below k is resolved by Hensel's lemma (its share of Y(Z_p) is
// p^(v - k(n-1)) if p^(k+v) | Q(x) - m, otherwise nothing); other classes are
// refined. The tree terminates on nonsingular Y, so values are exact.

#include <cstdint>
#include <span>
#include <string>

#include "powerfree/forms.hpp"
#include "powerfree/parallel.hpp"

namespace powerfree {

enum class DensityStatus { stabilized, capped, hensel_shortcut };
std::string to_string(DensityStatus s);

struct LocalDensityValue {
  std::uint64_t p = 0;
  ExactRational value;
  int level = 0;  // deepest level visited (1 for closed forms)
  DensityStatus status = DensityStatus::stabilized;
  ExactRational lower, upper;  // equal to value unless capped
  bool heuristic = false;
};

struct PrimeClass {
  std::uint64_t p = 0;
  bool good = false;
  bool divides_2 = false;
  bool divides_degree = false;
  bool divides_m = false;
  bool divides_det = false;
  bool f_singular = false;
  std::string reason;
};

/// Good iff p does not divide 2 d m det(2B) and f passes the nonsingularity
/// test mod p. For homogeneous f this is the form test; for other f it is the
/// pointwise test that Y and f = 0 meet transversally at every F_p point.
PrimeClass classify_prime(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t p);

/// #{x in F_p^n : Q(x) = m}.
BigInt count_points_mod_p(const AffineQuadric& Y, std::uint64_t p);
/// #Y(Z/p^e) by lifting.
BigInt count_points_mod_prime_power(const AffineQuadric& Y, std::uint64_t p, int e, const ParallelContext& ctx = {});

/// rho(l) = #{x in Y(Z/l) : f(x) = 0 mod l}, multiplicative over l.
BigInt rho(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t ell, const ParallelContext& ctx = {});
/// rho(p^e). With `exhaustive` the count is always obtained by lifting, never
/// through rho(p^e) = p^((e-1)(n-2)) rho(p) at good primes.
BigInt rho_prime_power(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t p, int e,
                       const ParallelContext& ctx = {}, bool exhaustive = false);
/// rho(l; c): additionally c . x = 0 mod l.
BigInt rho_linear_constraint(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t ell,
                             std::span<const std::int64_t> c, const ParallelContext& ctx = {});

/// mu_p(Y) = lim p^(-t(n-1)) #Y(Z/p^t).
LocalDensityValue padic_point_density(const AffineQuadric& Y, std::uint64_t p, const ParallelContext& ctx = {},
                                      bool exhaustive = false);
/// mu_p(Y, f, r): the density of x in Y(Z_p) with p^r not dividing f(x).
LocalDensityValue padic_density_f(const AffineQuadric& Y, const IntPolynomial& f, int r, std::uint64_t p,
                                  const ParallelContext& ctx = {}, bool exhaustive = false);
/// The complementary density of x in Y(Z_p) with p^r | f(x).
LocalDensityValue padic_density_divisible(const AffineQuadric& Y, const IntPolynomial& f, int r, std::uint64_t p,
                                          const ParallelContext& ctx = {}, bool exhaustive = false);
/// mu_p(Y; xi, l): the density of x in Y(Z_p) with x = xi mod p^(v_p(l)).
LocalDensityValue padic_density_xi(const AffineQuadric& Y, std::span<const std::int64_t> xi, std::uint64_t ell,
                                   std::uint64_t p, const ParallelContext& ctx = {}, bool exhaustive = false);

enum class Solubility { soluble, insoluble, unknown };
std::string to_string(Solubility s);

/// Soluble when some class mod p^k (k <= depth) carries a Hensel certificate,
/// insoluble when Q = m has no solution mod p^k for some k <= depth.
Solubility is_locally_soluble(const AffineQuadric& Y, std::uint64_t p, int depth, const ParallelContext& ctx = {});

/// Whether p^r divides f(x) for every x in Y(Z_p).
bool has_r_power_divisor_at(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t p, int r,
                            const ParallelContext& ctx = {});

}  // namespace powerfree
