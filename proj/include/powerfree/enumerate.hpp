#pragma once

// Exact enumeration of integer zeros of quadratic polynomials in boxes
// |x| <= H, and the counting functions built on the resulting point lists.

#include <cstdint>
#include <span>
#include <vector>

#include "powerfree/forms.hpp"
#include "powerfree/parallel.hpp"

namespace powerfree {

/// Integer points stored row by row, in lexicographic order.
struct PointList {
  int n = 0;
  std::vector<std::int64_t> coords;

  std::size_t size() const noexcept { return n == 0 ? 0 : coords.size() / static_cast<std::size_t>(n); }
  bool empty() const noexcept { return coords.empty(); }
  std::span<const std::int64_t> operator[](std::size_t i) const noexcept {
    return {coords.data() + i * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
  }
};

/// {x in Z^n : q(x) = 0, |x| <= B}. Costs (2B+1)^(n-1) fiber steps, checked
/// against the context budget.
PointList enumerate_zeros(const QuadraticPolynomial& q, std::int64_t B, const ParallelContext& ctx = {});
/// #{x in Z^n : q(x) = 0, |x| <= B} without storing the points.
std::uint64_t count_zeros(const QuadraticPolynomial& q, std::int64_t B, const ParallelContext& ctx = {});

/// Y(Z) in the box |x| <= H.
PointList enumerate_points(const AffineQuadric& Y, std::int64_t H, const ParallelContext& ctx = {});

/// N_r(Y, f; H): points whose value f(x) is r-free (f(x) = 0 never is).
std::uint64_t count_rfree_direct(const AffineQuadric& Y, const IntPolynomial& f, int r, std::int64_t H,
                                 const ParallelContext& ctx = {});
std::uint64_t count_rfree(const PointList& points, const IntPolynomial& f, int r);

/// V_l(H; xi): points with x = xi mod l.
std::uint64_t count_congruence(const AffineQuadric& Y, std::int64_t H, std::uint64_t ell,
                               std::span<const std::int64_t> xi, const ParallelContext& ctx = {});
std::uint64_t count_congruence(const PointList& points, std::uint64_t ell, std::span<const std::int64_t> xi);

/// U_l(H): points with 0 != f(x) = 0 mod l.
std::uint64_t count_divisible(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t ell, std::int64_t H,
                              const ParallelContext& ctx = {});
std::uint64_t count_divisible(const PointList& points, const IntPolynomial& f, std::uint64_t ell);

/// E(g; H): points with g(x) = 0. PreconditionError if g is the zero polynomial.
std::uint64_t count_zero_locus(const AffineQuadric& Y, const IntPolynomial& g, std::int64_t H,
                               const ParallelContext& ctx = {});
std::uint64_t count_zero_locus(const PointList& points, const IntPolynomial& g);

struct AffineCount {
  std::uint64_t count = 0;
  int rank_R = 0;   // rank of the homogenization
  int rank_q0 = 0;  // rank of the quadratic part
  bool absolutely_irreducible = false;  // rank_R >= 3
  bool hypotheses_hold = false;         // rank_R >= 3 and rank_q0 >= 2
};

/// M(q; B) together with the rank conditions under which it is O(B^(nu-2+eps)).
AffineCount count_affine_quadratic(const QuadraticPolynomial& q, std::int64_t B, const ParallelContext& ctx = {});

/// Label of the real component containing x (see AffineQuadric::component_of).
int real_component_of(const AffineQuadric& Y, std::span<const long double> x);

/// f evaluated at every point, as exact integers.
std::vector<BigInt> evaluate_on(const PointList& points, const IntPolynomial& f);

}  // namespace powerfree
