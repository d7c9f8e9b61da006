#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "powerfree/enumerate.hpp"
#include "powerfree/errors.hpp"
#include "powerfree/lattice.hpp"

using namespace powerfree;

namespace {

AffineQuadric make_quadric(std::initializer_list<std::int64_t> diagonal, std::int64_t m) {
  std::vector<std::int64_t> d(diagonal);
  return AffineQuadric(QuadraticForm::diagonal(d), m);
}

// Basis vectors as matrix columns, row-major.
std::vector<std::int64_t> column_matrix(const std::vector<IntVec>& basis) {
  const std::size_t n = basis.size();
  std::vector<std::int64_t> m(n * n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) m[r * n + c] = basis[c][r];
  }
  return m;
}

// Cramer's rule: y is an integral combination of the basis.
bool in_span(const std::vector<IntVec>& basis, const IntVec& y) {
  const int n = static_cast<int>(basis.size());
  const BigInt det = oracle::det_laplace(column_matrix(basis), n);
  for (int i = 0; i < n; ++i) {
    auto replaced = basis;
    replaced[static_cast<std::size_t>(i)] = y;
    if (oracle::det_laplace(column_matrix(replaced), n) % det != 0) return false;
  }
  return true;
}

std::int64_t sup(const IntVec& v) {
  std::int64_t s = 0;
  for (auto x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

TEST_CASE("worked lattice example") {
  const auto Y = make_quadric({1, 1, -2}, 1);
  const IntVec xi{1, 0, 0};
  const auto L = build_congruence_lattice(Y, xi, 5);
  CHECK(L.gradient == IntVec{2, 0, 0});
  CHECK(L.gcd == 1);
  CHECK(L.det == 5);
  CHECK(basis_determinant(L.basis) == 5);
  const auto R = reduce_basis(L);
  CHECK(sup_norm_product(R.basis) == 5);
  CHECK(sup(R.basis[0]) == 1);
  CHECK(sup(R.basis[1]) == 1);
  CHECK(sup(R.basis[2]) == 5);
  CHECK(std::abs(R.basis[2][0]) == 5);
}

TEST_CASE("trivial lattices") {
  const auto Y = make_quadric({1, 1, -2}, 1);
  const auto L1 = build_congruence_lattice(Y, IntVec{0, 0, 0}, 1);
  CHECK(L1.det == 1);
  CHECK(L1.basis == std::vector<IntVec>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const auto R1 = reduce_basis(L1);
  CHECK(sup_norm_product(R1.basis) == 1);

  // grad Q(1, 0, 0) = (2, 0, 0) vanishes mod 2.
  const auto L2 = build_congruence_lattice(Y, IntVec{1, 0, 0}, 2);
  CHECK(L2.gcd == 2);
  CHECK(L2.det == 1);

  // xi = (0, 0, 1) mod 3: grad = (0, 0, -4), so the lattice is diag(1, 1, 3).
  const auto L3 = build_congruence_lattice(Y, IntVec{0, 0, 1}, 3);
  CHECK(L3.basis == std::vector<IntVec>{{1, 0, 0}, {0, 1, 0}, {0, 0, 3}});
  const auto R3 = reduce_basis(L3);
  CHECK(R3.basis == L3.basis);
  CHECK(sup_norm_product(R3.basis) == 3);

  CHECK_THROWS_AS(build_congruence_lattice(Y, IntVec{0, 0, 0}, 5), PreconditionError);
}

TEST_CASE("determinant formula and membership over all classes") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::int64_t> coord(-60, 60);
  for (const auto& Y : {make_quadric({1, 1, -2}, 1), make_quadric({3, -1, 2, -5}, 7)}) {
    const int n = Y.n();
    for (std::uint64_t ell = 2; ell <= 12; ++ell) {
      oracle::for_each_residue(n, ell, [&](const std::vector<std::uint64_t>& x) {
        if (oracle::form_mod(Y.form(), x, ell) != reduce_mod(Y.m(), ell)) return;
        const IntVec xi(x.begin(), x.end());
        const auto L = build_congruence_lattice(Y, xi, ell);
        // gcd(l, 2 B xi) computed from the coefficients.
        std::uint64_t g = ell;
        for (int i = 0; i < n; ++i) {
          BigInt s = 0;
          for (int k = 0; k < n; ++k) s += BigInt(Y.form().gram(i, k)) * xi[static_cast<std::size_t>(k)];
          g = std::gcd(g, reduce_mod(s, ell));
        }
        CHECK(L.det == ell / g);
        CHECK(basis_determinant(L.basis) == ell / g);
        CHECK((2 * Y.m()) % static_cast<std::int64_t>(g) == 0);
        for (const IntVec& b : L.basis) CHECK(L.contains(b));
        const auto R = reduce_basis(L);
        CHECK(basis_determinant(R.basis) == L.det);
        for (std::size_t i = 1; i < R.basis.size(); ++i) CHECK(sup(R.basis[i - 1]) <= sup(R.basis[i]));
        if (ell == 12) {
          for (int t = 0; t < 20; ++t) {
            IntVec y(static_cast<std::size_t>(n));
            for (auto& v : y) v = coord(rng);
            CHECK(in_span(R.basis, y) == L.contains(y));
          }
        }
      });
    }
  }
}

TEST_CASE("derived quadratic transports congruent points") {
  const auto Y = make_quadric({1, 1, -2}, 1);
  const IntVec x0{1, 0, 0};
  const auto L = reduce_basis(build_congruence_lattice(Y, x0, 5));
  const auto D = derived_quadratic(Y, x0, L);
  CHECK(D.rank == 3);
  CHECK(D.q.eval(IntVec{0, 0, 0}) == 0);

  const PointList pts = enumerate_points(Y, 100);
  std::set<IntVec> seen;
  std::size_t congruent = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const IntVec x(pts[i].begin(), pts[i].end());
    bool match = true;
    for (std::size_t c = 0; c < 3; ++c) match = match && reduce_mod(x[c] - x0[c], 5) == 0;
    const auto lambda = transport(L, x0, x);
    CHECK(lambda.has_value() == match);
    if (!lambda) continue;
    ++congruent;
    CHECK(D.q.eval(*lambda) == 0);
    seen.insert(*lambda);
    // Back again.
    IntVec back = x0;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t k = 0; k < 3; ++k) back[c] += 5 * L.basis[k][c] * (*lambda)[k];
    }
    CHECK(back == x);
  }
  CHECK(congruent > 10);
  CHECK(seen.size() == congruent);
}

TEST_CASE("derived quadratic guards") {
  const auto Y = make_quadric({1, 1, -2}, 1);
  auto L = build_congruence_lattice(Y, IntVec{1, 0, 0}, 5);
  CHECK_THROWS_AS(derived_quadratic(Y, IntVec{2, 0, 0}, L), PreconditionError);
  CHECK_THROWS_AS(derived_quadratic(Y, IntVec{3, 2, 2}, L), PreconditionError);  // on Y, wrong class
  L.basis[0] = {1, 0, 0};  // not in the lattice
  CHECK_THROWS_AS(derived_quadratic(Y, IntVec{1, 0, 0}, L), InvariantViolation);
}

TEST_CASE("bound diagnostics: linear f") {
  const auto Y = make_quadric({1, 1, 1, -1}, 1);
  IntPolynomial f(4);
  f.add_term({0, 0, 0, 1}, 1);
  const auto diag = bound_diagnostics(Y, f, 1, 1, 30, 50);
  CHECK(diag.envelope == "linear");
  CHECK(diag.rows.size() > 10);
  const PointList pts = enumerate_points(Y, 30);
  for (const auto& row : diag.rows) {
    CHECK(row.in_range);
    CHECK(row.U == count_divisible(pts, f, row.ell));
    CHECK(row.constant_U_eps2 <= row.constant_U);
    REQUIRE(row.constant_V.has_value());
  }
  CHECK(diag.worst_U > 0);
  CHECK(diag.worst_U < 50);
}

TEST_CASE("bound diagnostics: ternary, quadratic f, j = 7") {
  const auto Y = make_quadric({1, 1, -2}, 1);
  IntPolynomial f(3);
  f.add_term({2, 0, 0}, 1);
  f.add_term({0, 2, 0}, 1);
  const auto diag = bound_diagnostics(Y, f, 7, 2, 650, 2);
  CHECK(diag.envelope == "n=3");
  REQUIRE(diag.rows.size() == 1);
  CHECK(diag.rows[0].ell == 128);
  CHECK(diag.rows[0].in_range);  // 2^(28/3) < 650
  CHECK_FALSE(diag.rows[0].constant_V.has_value());
  CHECK(diag.worst_U < 16);
}

TEST_CASE("moduli past the vanishing cutoff count nothing") {
  const auto Y = make_quadric({1, 1, -2}, 1);
  IntPolynomial f(3);
  f.add_term({1, 0, 0}, 1);
  const PointList pts = enumerate_points(Y, 20);
  CHECK(count_divisible(pts, f, 21) == 0);
  CHECK(count_divisible(pts, f, 1000) == 0);
}
