#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "powerfree/enumerate.hpp"
#include "powerfree/errors.hpp"

using namespace powerfree;

namespace {

AffineQuadric make_quadric(std::initializer_list<std::int64_t> diagonal, std::int64_t m) {
  std::vector<std::int64_t> d(diagonal);
  return AffineQuadric(QuadraticForm::diagonal(d), m);
}

IntPolynomial poly(int n, std::initializer_list<std::pair<std::vector<int>, std::int64_t>> terms) {
  IntPolynomial f(n);
  for (const auto& [e, c] : terms) f.add_term(e, c);
  return f;
}

PointList brute_zeros(const QuadraticPolynomial& q, std::int64_t B) {
  PointList out;
  out.n = q.n();
  oracle::for_each_in_box(q.n(), B, [&](const std::vector<std::int64_t>& x) {
    if (oracle::poly_value(q.to_polynomial(), x) == 0) out.coords.insert(out.coords.end(), x.begin(), x.end());
  });
  return out;
}

QuadraticPolynomial random_quadratic(int n, std::mt19937_64& rng, bool with_linear) {
  std::uniform_int_distribution<std::int64_t> coef(-3, 3);
  std::uniform_int_distribution<int> coin(0, 2);
  std::vector<std::tuple<int, int, std::int64_t>> t;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (coin(rng) != 0) t.emplace_back(i, j, coef(rng));
    }
  }
  QuadraticPolynomial q;
  q.quad = QuadraticForm::from_coefficients(n, t);
  q.linear.assign(static_cast<std::size_t>(n), 0);
  if (with_linear) {
    for (auto& v : q.linear) v = coef(rng);
  }
  q.constant = coef(rng) * 2;
  return q;
}

}  // namespace

TEST_CASE("enumerate_points on a small box") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const PointList pts = enumerate_points(Y, 2);
  REQUIRE(pts.size() == 4);
  const std::vector<std::int64_t> expected{-1, 0, 0, 0, -1, 0, 0, 1, 0, 1, 0, 0};
  CHECK(pts.coords == expected);
  CHECK(enumerate_points(Y, 0).empty());
}

TEST_CASE("enumeration matches a box scan for random quadratics") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 2 + trial % 3;
    const std::int64_t B = n == 4 ? 4 : 7;
    const QuadraticPolynomial q = random_quadratic(n, rng, trial % 2 == 0);
    if (q.quad.is_zero()) continue;
    const PointList fast = enumerate_zeros(q, B);
    const PointList slow = brute_zeros(q, B);
    CHECK(fast.coords == slow.coords);
    CHECK(count_zeros(q, B) == slow.size());
  }
}

TEST_CASE("the first example has no integer points") {
  const std::vector<std::tuple<int, int, std::int64_t>> t{{0, 0, -9}, {0, 1, 2}, {1, 1, 7}, {2, 2, 2}};
  const AffineQuadric Y(QuadraticForm::from_coefficients(3, t), 1);
  CHECK(enumerate_points(Y, 1000, ParallelContext(2)).empty());
}

TEST_CASE("counting functions") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const IntPolynomial x1 = IntPolynomial::variable(3, 0);
  CHECK(count_rfree_direct(Y, x1, 2, 2) == 2);

  const std::vector<std::int64_t> zero{0, 0, 0}, xi{1, 0, 0};
  CHECK(count_congruence(Y, 2, 1, zero) == 4);
  CHECK(count_congruence(Y, 2, 2, xi) == 2);
  CHECK(count_divisible(Y, x1, 2, 3) == 0);
  CHECK(count_zero_locus(Y, x1, 3) == 6);
  CHECK(count_zero_locus(Y, IntPolynomial::constant(3, 1), 3) == 0);
  CHECK_THROWS_AS(count_zero_locus(Y, IntPolynomial(3), 3), PreconditionError);
}

TEST_CASE("counting functions agree with a scan and partition the points") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const IntPolynomial f = poly(3, {{{1, 0, 0}, 1}, {{0, 1, 0}, 2}, {{0, 0, 1}, 1}});
  const std::int64_t H = 40;
  const PointList pts = enumerate_points(Y, H);

  std::uint64_t rfree = 0, div4 = 0, zeros = 0;
  oracle::for_each_in_box(3, H, [&](const std::vector<std::int64_t>& x) {
    if (oracle::poly_value(QuadraticPolynomial::from_quadric(Y).to_polynomial(), x) != 0) return;
    const BigInt v = oracle::poly_value(f, x);
    if (v == 0) {
      ++zeros;
      return;
    }
    if (v % 4 == 0) ++div4;
    bool square_free = true;
    for (BigInt d = 2; d * d <= abs(v); ++d) square_free &= v % (d * d) != 0;
    if (square_free) ++rfree;
  });
  CHECK(count_rfree(pts, f, 2) == rfree);
  CHECK(count_divisible(pts, f, 4) == div4);
  CHECK(count_zero_locus(pts, f) == zeros);

  for (std::uint64_t ell : {2ULL, 3ULL, 4ULL}) {
    std::uint64_t total = 0;
    oracle::for_each_residue(3, ell, [&](const std::vector<std::uint64_t>& r) {
      std::vector<std::int64_t> xi(r.begin(), r.end());
      total += count_congruence(pts, ell, xi);
    });
    CHECK(total == pts.size());
  }
  // U_l is monotone along divisibility.
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL}) {
    CHECK(count_divisible(pts, f, a * a) <= count_divisible(pts, f, a));
  }
}

TEST_CASE("count_affine_quadratic") {
  const auto circle = QuadraticPolynomial::from_polynomial(poly(2, {{{2, 0}, 1}, {{0, 2}, 1}, {{0, 0}, -25}}));
  const AffineCount c = count_affine_quadratic(circle, 10);
  CHECK(c.count == 12);
  CHECK(c.hypotheses_hold);

  const auto parabola = QuadraticPolynomial::from_polynomial(poly(2, {{{1, 0}, 1}, {{0, 2}, -1}}));
  const AffineCount p = count_affine_quadratic(parabola, 10);
  CHECK(p.count == 7);
  CHECK(p.rank_R == 3);
  CHECK(p.rank_q0 == 1);
  CHECK_FALSE(p.hypotheses_hold);

  const auto cross = QuadraticPolynomial::from_polynomial(poly(2, {{{1, 1}, 1}}));
  const AffineCount x = count_affine_quadratic(cross, 5);
  CHECK(x.count == 21);
  CHECK_FALSE(x.absolutely_irreducible);
}

TEST_CASE("results do not depend on the worker count") {
  const AffineQuadric Y = make_quadric({1, 3, -5, 2}, 7);
  const PointList a = enumerate_points(Y, 30, ParallelContext(1));
  const PointList b = enumerate_points(Y, 30, ParallelContext(4));
  const PointList c = enumerate_points(Y, 30, ParallelContext(8));
  CHECK(a.size() > 0);
  CHECK(a.coords == b.coords);
  CHECK(a.coords == c.coords);
}

TEST_CASE("budget is enforced") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  CHECK_THROWS_AS(enumerate_points(Y, 1000, ParallelContext(1, 100)), BudgetExceeded);
}

TEST_CASE("real components of enumerated points") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, -1);
  const PointList pts = enumerate_points(Y, 20);
  REQUIRE(pts.size() > 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto x = pts[i];
    const std::vector<long double> xr(x.begin(), x.end());
    CHECK(real_component_of(Y, xr) == (x[2] > 0 ? 1 : 0));
  }
}
