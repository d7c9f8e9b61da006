#include "powerfree/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

#include "powerfree/enumerate.hpp"
#include "powerfree/errors.hpp"
#include "powerfree/sieve.hpp"

namespace powerfree {
namespace {

using Rational = boost::multiprecision::cpp_rational;
using BigVec = std::vector<BigInt>;
using BigMatrix = std::vector<BigVec>;  // row-major

constexpr long double kEps = 0.1L;
constexpr long double kEps2 = 0.2L;

// s a + t b = g >= 0.
BigInt extended_gcd(const BigInt& a, const BigInt& b, BigInt& s, BigInt& t) {
  BigInt r0 = a, r1 = b, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    const BigInt q = r0 / r1;
    BigInt tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = s0 - q * s1;
    s0 = s1;
    s1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  if (r0 < 0) {
    r0 = -r0;
    s0 = -s0;
    t0 = -t0;
  }
  s = s0;
  t = t0;
  return r0;
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Column operation on columns i, c of A so that A[row][c] becomes 0 and
// A[row][i] becomes the gcd of the two entries.
void eliminate(BigMatrix& A, std::size_t row, std::size_t i, std::size_t c) {
  const BigInt a = A[row][i], b = A[row][c];
  if (b == 0) return;
  BigInt s, t;
  const BigInt g = extended_gcd(a, b, s, t);
  const BigInt u = -b / g, v = a / g;
  for (auto& r : A) {
    const BigInt x = r[i], y = r[c];
    r[i] = s * x + t * y;
    r[c] = u * x + v * y;
  }
}

// Lower-triangular column Hermite normal form of a square nonsingular matrix.
void column_hnf(BigMatrix& A) {
  const std::size_t n = A.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = i + 1; c < n; ++c) eliminate(A, i, i, c);
    if (A[i][i] == 0) throw InvariantViolation("hermite normal form: singular generator matrix");
    if (A[i][i] < 0) {
      for (auto& r : A) r[i] = -r[i];
    }
    for (std::size_t c = 0; c < i; ++c) {
      const BigInt q = floor_div(A[i][c], A[i][i]);
      if (q == 0) continue;
      for (auto& r : A) r[c] -= q * r[i];
    }
  }
}

std::int64_t to_int64(const BigInt& v, const char* what) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw ArithmeticOverflow(std::string(what) + ": entry exceeds 64 bits");
  }
  return static_cast<std::int64_t>(v);
}

Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Exact LLL on row vectors.
void lll(std::vector<BigVec>& b, const Rational& delta) {
  const std::size_t n = b.size();
  if (n < 2) return;
  const std::size_t dim = b[0].size();
  std::vector<std::vector<Rational>> star(n, std::vector<Rational>(dim));
  std::vector<std::vector<Rational>> mu(n, std::vector<Rational>(n));
  std::vector<Rational> norm(n);
  auto gram_schmidt = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < dim; ++c) star[i][c] = Rational(b[i][c]);
      for (std::size_t j = 0; j < i; ++j) {
        std::vector<Rational> bi(dim);
        for (std::size_t c = 0; c < dim; ++c) bi[c] = Rational(b[i][c]);
        mu[i][j] = dot(bi, star[j]) / norm[j];
        for (std::size_t c = 0; c < dim; ++c) star[i][c] -= mu[i][j] * star[j][c];
      }
      norm[i] = dot(star[i], star[i]);
    }
  };
  gram_schmidt();
  std::size_t k = 1;
  while (k < n) {
    for (std::size_t jj = k; jj-- > 0;) {
      const Rational half(1, 2);
      const Rational shifted = mu[k][jj] + half;
      BigInt q = floor_div(boost::multiprecision::numerator(shifted), boost::multiprecision::denominator(shifted));
      if (q == 0) continue;
      for (std::size_t c = 0; c < dim; ++c) b[k][c] -= q * b[jj][c];
      gram_schmidt();
    }
    if (norm[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norm[k - 1]) {
      ++k;
    } else {
      std::swap(b[k], b[k - 1]);
      gram_schmidt();
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
}

// Solves A x = y for square nonsingular A (row-major), exactly.
std::optional<std::vector<Rational>> solve(BigMatrix A, BigVec y) {
  const std::size_t n = A.size();
  std::vector<std::vector<Rational>> M(n, std::vector<Rational>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) M[i][j] = Rational(A[i][j]);
    M[i][n] = Rational(y[i]);
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && M[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(M[piv], M[col]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || M[i][col] == 0) continue;
      const Rational factor = M[i][col] / M[col][col];
      for (std::size_t j = col; j <= n; ++j) M[i][j] -= factor * M[col][j];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = M[i][n] / M[i][i];
  return x;
}

int exact_rank(const BigMatrix& A) {
  std::vector<std::vector<Rational>> M;
  for (const auto& row : A) {
    std::vector<Rational> r;
    for (const auto& v : row) r.emplace_back(v);
    M.push_back(std::move(r));
  }
  const std::size_t rows = M.size(), cols = rows == 0 ? 0 : M[0].size();
  int rank = 0;
  for (std::size_t col = 0; col < cols && static_cast<std::size_t>(rank) < rows; ++col) {
    std::size_t piv = static_cast<std::size_t>(rank);
    while (piv < rows && M[piv][col] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(M[piv], M[static_cast<std::size_t>(rank)]);
    const auto& p = M[static_cast<std::size_t>(rank)];
    for (std::size_t i = static_cast<std::size_t>(rank) + 1; i < rows; ++i) {
      if (M[i][col] == 0) continue;
      const Rational factor = M[i][col] / p[col];
      for (std::size_t j = col; j < cols; ++j) M[i][j] -= factor * p[j];
    }
    ++rank;
  }
  return rank;
}

BigMatrix basis_columns(const std::vector<IntVec>& basis) {
  const std::size_t n = basis.size();
  BigMatrix M(n, BigVec(n));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) M[r][c] = basis[c][r];
  }
  return M;
}

BigInt determinant(BigMatrix A) {
  // Fraction-free (Bareiss) elimination.
  const std::size_t n = A.size();
  if (n == 0) return 1;
  BigInt prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (A[k][k] == 0) {
      std::size_t piv = k + 1;
      while (piv < n && A[piv][k] == 0) ++piv;
      if (piv == n) return 0;
      std::swap(A[piv], A[k]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) / prev;
    }
    prev = A[k][k];
  }
  return sign * A[n - 1][n - 1];
}

std::int64_t sup_norm(std::span<const std::int64_t> v) {
  std::int64_t s = 0;
  for (std::int64_t x : v) s = std::max(s, x < 0 ? -x : x);
  return s;
}

}  // namespace

bool CongruenceLattice::contains(std::span<const std::int64_t> y) const {
  BigInt s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += BigInt(y[i]) * gradient[i];
  return s % ell == 0;
}

BigInt basis_determinant(const std::vector<IntVec>& basis) {
  BigInt d = determinant(basis_columns(basis));
  return d < 0 ? BigInt(-d) : d;
}

BigInt sup_norm_product(const std::vector<IntVec>& basis) {
  BigInt p = 1;
  for (const IntVec& v : basis) p *= sup_norm(v);
  return p;
}

CongruenceLattice build_congruence_lattice(const AffineQuadric& Y, std::span<const std::int64_t> xi,
                                           std::uint64_t ell) {
  const int n = Y.n();
  const auto N = static_cast<std::size_t>(n);
  if (ell == 0) throw PreconditionError("congruence lattice: l must be positive");
  if (xi.size() != N) throw PreconditionError("congruence lattice: xi has the wrong length");
  CongruenceLattice L;
  L.n = n;
  L.ell = ell;
  for (std::int64_t v : xi) L.xi.push_back(static_cast<std::int64_t>(reduce_mod(v, ell)));
  if (reduce_mod(QuadraticPolynomial::from_quadric(Y).eval(L.xi), ell) != 0) {
    throw PreconditionError("congruence lattice: xi is not on the quadric mod l");
  }
  L.gradient = Y.form().gradient(L.xi);

  std::uint64_t g = ell;
  for (std::int64_t v : L.gradient) g = std::gcd(g, reduce_mod(v, ell));
  L.gcd = g;
  if (reduce_mod(2 * static_cast<i128>(Y.m()), g) != 0) {
    throw InvariantViolation("congruence lattice: gcd(l, grad Q(xi)) does not divide 2m");
  }

  // Kernel of (grad Q(xi) | l) : Z^(n+1) -> Z by unimodular column operations;
  // dropping the last coordinate of the kernel basis gives a basis of the lattice.
  BigMatrix A(N + 2, BigVec(N + 1, 0));  // row 0 is the map, rows 1.. track U
  for (std::size_t i = 0; i < N; ++i) A[0][i] = reduce_mod(L.gradient[i], ell);
  A[0][N] = ell;
  for (std::size_t i = 0; i <= N; ++i) A[i + 1][i] = 1;
  for (std::size_t c = 1; c <= N; ++c) eliminate(A, 0, 0, c);
  BigMatrix gens(N, BigVec(N));
  for (std::size_t r = 0; r < N; ++r) {
    for (std::size_t c = 0; c < N; ++c) gens[r][c] = A[r + 1][c + 1];
  }
  column_hnf(gens);

  BigInt det = 1;
  for (std::size_t i = 0; i < N; ++i) det *= gens[i][i];
  L.det = ell / g;
  if (det != L.det) throw InvariantViolation("congruence lattice: determinant differs from l / gcd");
  L.basis.assign(N, IntVec(N));
  for (std::size_t c = 0; c < N; ++c) {
    for (std::size_t r = 0; r < N; ++r) L.basis[c][r] = to_int64(gens[r][c], "congruence lattice");
  }
  return L;
}

CongruenceLattice reduce_basis(const CongruenceLattice& L) {
  const auto N = static_cast<std::size_t>(L.n);
  std::vector<BigVec> b(N, BigVec(N));
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t c = 0; c < N; ++c) b[i][c] = L.basis[i][c];
  }
  lll(b, Rational(99, 100));
  CongruenceLattice out = L;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t c = 0; c < N; ++c) out.basis[i][c] = to_int64(b[i][c], "basis reduction");
  }
  std::stable_sort(out.basis.begin(), out.basis.end(),
                   [](const IntVec& a, const IntVec& c) { return sup_norm(a) < sup_norm(c); });
  if (basis_determinant(out.basis) != L.det) throw InvariantViolation("basis reduction changed the determinant");
  BigInt bound = BigInt(L.det) << (L.n * L.n);
  if (sup_norm_product(out.basis) > bound) throw InvariantViolation("reduced basis exceeds the 2^(n^2) det bound");
  return out;
}

DerivedQuadratic derived_quadratic(const AffineQuadric& Y, std::span<const std::int64_t> x0,
                                   const CongruenceLattice& L) {
  const auto N = static_cast<std::size_t>(Y.n());
  if (x0.size() != N || !Y.contains(x0)) throw PreconditionError("derived quadratic: x0 is not on Y");
  for (std::size_t i = 0; i < N; ++i) {
    if (reduce_mod(x0[i], L.ell) != static_cast<std::uint64_t>(L.xi[i])) {
      throw PreconditionError("derived quadratic: x0 is not congruent to xi");
    }
  }
  const IntVec grad = Y.form().gradient(x0);
  DerivedQuadratic out;
  for (const IntVec& m : L.basis) {
    BigInt s = 0;
    for (std::size_t i = 0; i < N; ++i) s += BigInt(m[i]) * grad[i];
    if (s % L.ell != 0) throw InvariantViolation("derived quadratic: basis vector outside the congruence lattice");
    out.b.push_back(to_int64(s / L.ell, "derived quadratic"));
  }
  // Doubled Gram matrix M^T (2B) M.
  BigMatrix G(N, BigVec(N, 0));
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t c = 0; c < N; ++c) {
      BigInt s = 0;
      for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < N; ++k) {
          s += BigInt(L.basis[a][i]) * Y.form().gram(static_cast<int>(i), static_cast<int>(k)) * L.basis[c][k];
        }
      }
      G[a][c] = s;
    }
  }
  IntVec gram;
  for (const auto& row : G) {
    for (const auto& v : row) gram.push_back(to_int64(v, "derived quadratic"));
  }
  out.rank = exact_rank(G);
  out.q.quad = QuadraticForm::from_doubled_gram(Y.n(), std::move(gram));
  out.q.linear = out.b;
  out.q.constant = 0;
  return out;
}

std::optional<IntVec> transport(const CongruenceLattice& L, std::span<const std::int64_t> x0,
                                std::span<const std::int64_t> x) {
  const auto N = static_cast<std::size_t>(L.n);
  BigVec y(N);
  for (std::size_t i = 0; i < N; ++i) {
    const BigInt d = BigInt(x[i]) - x0[i];
    if (d % L.ell != 0) return std::nullopt;
    y[i] = d / L.ell;
  }
  const auto sol = solve(basis_columns(L.basis), y);
  if (!sol) return std::nullopt;
  IntVec lambda;
  for (const Rational& v : *sol) {
    if (boost::multiprecision::denominator(v) != 1) return std::nullopt;
    lambda.push_back(to_int64(boost::multiprecision::numerator(v), "transport"));
  }
  return lambda;
}

BoundDiagnostics bound_diagnostics(const AffineQuadric& Y, const IntPolynomial& f, int j, int r, std::int64_t H,
                                   std::uint64_t k_max, const ParallelContext& ctx) {
  if (j < 1) throw PreconditionError("bound_diagnostics: j must be >= 1");
  if (r < 1) throw PreconditionError("bound_diagnostics: r must be >= 1");
  if (H < 1) throw PreconditionError("bound_diagnostics: H must be >= 1");
  if (f.degree() < 1) throw PreconditionError("bound_diagnostics: f must be non-constant");
  const int n = Y.n(), d = f.degree();
  BoundDiagnostics out;
  out.H = H;
  out.j = j;
  out.r = r;
  out.envelope = d == 1 ? "linear" : (n >= 4 ? "n>=4" : "n=3");

  const PointList points = enumerate_points(Y, H, ctx);
  out.points = points.size();
  const std::uint64_t k_top = std::min(k_max, sieve_cutoff(f, r, H));
  const auto mu = mobius_table(std::max<std::uint64_t>(k_top, 1));
  std::vector<std::uint64_t> ks;
  for (std::uint64_t k = 2; k <= k_top; ++k) {
    if (mu[k] != 0) ks.push_back(k);
  }

  const long double h = static_cast<long double>(H);
  auto envelope_U = [&](long double k, long double ell, long double eps) {
    if (d == 1) return std::pow(h, n - 2 + eps) / ell;
    if (n >= 4) return std::pow(k, -static_cast<long double>(j) / (n - 1)) * std::pow(h, n - 2 + eps);
    return std::pow(k, -static_cast<long double>(j) / (3 * d)) * std::pow(h, 1 + eps);
  };
  auto in_range = [&](long double k) {
    if (d == 1) return true;
    if (n >= 4) return std::pow(k, static_cast<long double>(j) * n / (n - 1)) <= h;
    return std::pow(k, 4.0L * j / 3) <= h;
  };

  out.rows = ctx.map<BoundRow>(ks.size(), [&](std::size_t i) {
    BoundRow row;
    row.k = ks[i];
    row.ell = checked_pow(row.k, j);
    row.U = count_divisible(points, f, row.ell);
    std::map<IntVec, std::uint64_t> classes;
    IntVec key(static_cast<std::size_t>(n));
    for (std::size_t p = 0; p < points.size(); ++p) {
      if ((p & 4095) == 0) ctx.poll();
      const auto x = points[p];
      for (std::size_t c = 0; c < key.size(); ++c) key[c] = static_cast<std::int64_t>(reduce_mod(x[c], row.ell));
      row.V_max = std::max(row.V_max, ++classes[key]);
    }
    const long double k = static_cast<long double>(row.k), ell = static_cast<long double>(row.ell);
    row.in_range = in_range(k);
    row.envelope_U = envelope_U(k, ell, kEps);
    row.constant_U = static_cast<long double>(row.U) / row.envelope_U;
    row.constant_U_eps2 = static_cast<long double>(row.U) / envelope_U(k, ell, kEps2);
    if (n >= 4) {
      row.envelope_V = std::pow(h / ell, n - 3 + kEps) * (1 + h / std::pow(ell, static_cast<long double>(n) / (n - 1)));
      row.constant_V = static_cast<long double>(row.V_max) / *row.envelope_V;
    }
    return row;
  });
  for (const BoundRow& row : out.rows) {
    if (row.constant_V) out.worst_V = std::max(out.worst_V.value_or(0), *row.constant_V);
    if (!row.in_range) continue;
    out.worst_U = std::max(out.worst_U, row.constant_U);
    out.worst_U_eps2 = std::max(out.worst_U_eps2, row.constant_U_eps2);
  }
  return out;
}

}  // namespace powerfree
