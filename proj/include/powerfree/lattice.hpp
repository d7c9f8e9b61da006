#pragma once

// Congruence lattices {y : y . grad Q(xi) = 0 mod l}, reduced bases, and the
// quadratic q(lambda) obtained by writing congruent points in such a basis.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "powerfree/forms.hpp"
#include "powerfree/parallel.hpp"

namespace powerfree {

struct CongruenceLattice {
  int n = 0;
  std::uint64_t ell = 1;
  IntVec xi;                  // residues in [0, l)
  IntVec gradient;            // grad Q(xi) = 2B xi
  std::vector<IntVec> basis;  // n basis vectors
  std::uint64_t gcd = 1;      // gcd(l, grad Q(xi))
  std::uint64_t det = 1;      // l / gcd

  bool contains(std::span<const std::int64_t> y) const;
};

/// Basis in column Hermite normal form (lower triangular, positive diagonal,
/// entries left of the diagonal reduced modulo it). PreconditionError unless
/// Q(xi) = m mod l; InvariantViolation if gcd(l, grad Q(xi)) does not divide
/// 2m or the determinant disagrees with l / gcd.
CongruenceLattice build_congruence_lattice(const AffineQuadric& Y, std::span<const std::int64_t> xi,
                                           std::uint64_t ell);

/// LLL with parameter 0.99, then sorted by ascending sup-norm. Throws
/// InvariantViolation if the determinant changes or the product of sup-norms
/// exceeds 2^(n^2) det.
CongruenceLattice reduce_basis(const CongruenceLattice& L);

/// |det| of the basis matrix.
BigInt basis_determinant(const std::vector<IntVec>& basis);
/// Product of the sup-norms of the basis vectors.
BigInt sup_norm_product(const std::vector<IntVec>& basis);

struct DerivedQuadratic {
  QuadraticPolynomial q;  // Q(sum lambda_i m_i) + sum b_i lambda_i
  IntVec b;               // b_i = m_i . grad Q(x0) / l
  int rank = 0;           // rank of the quadratic part
};

/// PreconditionError unless x0 lies on Y and x0 = xi mod l. InvariantViolation
/// if some m_i . grad Q(x0) is not divisible by l.
DerivedQuadratic derived_quadratic(const AffineQuadric& Y, std::span<const std::int64_t> x0,
                                   const CongruenceLattice& L);

/// The lambda with x = x0 + l M lambda, or nothing when x is not congruent to
/// x0 modulo l or the solution is not integral.
std::optional<IntVec> transport(const CongruenceLattice& L, std::span<const std::int64_t> x0,
                                std::span<const std::int64_t> x);

struct BoundRow {
  std::uint64_t k = 0;
  std::uint64_t ell = 0;  // k^j
  std::uint64_t U = 0;    // U_l(H)
  std::uint64_t V_max = 0;  // max over classes xi of V_l(H; xi)
  bool in_range = false;    // the envelope's hypothesis on k holds
  long double envelope_U = 0;
  long double constant_U = 0;       // U / envelope at eps = 0.1
  long double constant_U_eps2 = 0;  // at eps = 0.2
  std::optional<long double> envelope_V;
  std::optional<long double> constant_V;
};

struct BoundDiagnostics {
  std::int64_t H = 0;
  int j = 0;
  int r = 0;
  std::string envelope;  // "linear", "n>=4" or "n=3"
  std::uint64_t points = 0;
  std::vector<BoundRow> rows;  // square-free k in increasing order
  long double worst_U = 0;     // over in-range rows
  long double worst_U_eps2 = 0;
  std::optional<long double> worst_V;
};

/// Measured U_{k^j}(H) and max_xi V_{k^j}(H; xi) for square-free 2 <= k <= k_max
/// with k^r <= C_f H^d, against the envelopes
///   l^-1 H^(n-2+eps)               (f linear, l = k^j),
///   k^(-j/(n-1)) H^(n-2+eps)        (n >= 4, when k^(jn/(n-1)) <= H),
///   k^(-j/(3d)) H^(1+eps)           (n = 3, when k^(4j/3) <= H),
/// and for n >= 4 (H/l)^(n-3+eps) (1 + H / l^(n/(n-1))) for V.
BoundDiagnostics bound_diagnostics(const AffineQuadric& Y, const IntPolynomial& f, int j, int r, std::int64_t H,
                                   std::uint64_t k_max = 50, const ParallelContext& ctx = {});

}  // namespace powerfree
