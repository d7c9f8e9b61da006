#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "powerfree/errors.hpp"
#include "powerfree/localdens.hpp"

using namespace powerfree;

namespace {

AffineQuadric make_quadric(std::initializer_list<std::int64_t> diagonal, std::int64_t m) {
  std::vector<std::int64_t> d(diagonal);
  return AffineQuadric(QuadraticForm::diagonal(d), m);
}

AffineQuadric example_one() {
  const std::vector<std::tuple<int, int, std::int64_t>> t{{0, 0, -9}, {0, 1, 2}, {1, 1, 7}, {2, 2, 2}};
  return AffineQuadric(QuadraticForm::from_coefficients(3, t), 1);
}

IntPolynomial poly(int n, std::initializer_list<std::pair<std::vector<int>, std::int64_t>> terms) {
  IntPolynomial f(n);
  for (const auto& [e, c] : terms) f.add_term(e, c);
  return f;
}

bool on_quadric(const AffineQuadric& Y, const std::vector<std::uint64_t>& x, std::uint64_t q) {
  return oracle::form_mod(Y.form(), x, q) == reduce_mod(Y.m(), q);
}

// #{x mod q on Y : pred(x)} by scanning (Z/q)^n.
template <typename Pred>
std::uint64_t scan(const AffineQuadric& Y, std::uint64_t q, Pred pred) {
  std::uint64_t count = 0;
  oracle::for_each_residue(Y.n(), q, [&](const std::vector<std::uint64_t>& x) {
    if (on_quadric(Y, x, q) && pred(x)) ++count;
  });
  return count;
}

std::uint64_t scan_rho(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t q,
                       const std::vector<std::int64_t>& c = {}) {
  return scan(Y, q, [&](const std::vector<std::uint64_t>& x) {
    if (oracle::poly_mod(f, x, q) != 0) return false;
    if (c.empty()) return true;
    BigInt s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += BigInt(c[i]) * x[i];
    return s % q == 0;
  });
}

// p^(-t(n-1)) #{x mod p^t on Y : p^r does not divide f(x)}.
ExactRational scan_density_f(const AffineQuadric& Y, const IntPolynomial& f, int r, std::uint64_t p, int t) {
  const std::uint64_t q = checked_pow(p, t), pr = checked_pow(p, r);
  const auto count = scan(Y, q, [&](const std::vector<std::uint64_t>& x) { return oracle::poly_mod(f, x, pr) != 0; });
  return ExactRational(BigInt(count)) * ExactRational::power(p, -t * (Y.n() - 1));
}

ExactRational scan_density(const AffineQuadric& Y, std::uint64_t p, int t) {
  const auto count = scan(Y, checked_pow(p, t), [](const std::vector<std::uint64_t>&) { return true; });
  return ExactRational(BigInt(count)) * ExactRational::power(p, -t * (Y.n() - 1));
}

}  // namespace

TEST_CASE("classify_prime") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const IntPolynomial x3 = IntPolynomial::variable(3, 2);
  CHECK(classify_prime(Y, x3, 3).good);
  CHECK_FALSE(classify_prime(Y, x3, 2).good);
  CHECK(classify_prime(Y, x3, 2).divides_2);
  const IntPolynomial sum_sq = poly(3, {{{2, 0, 0}, 1}, {{0, 2, 0}, 1}});
  // X1^2 + X2^2 is a singular ternary form at every prime.
  CHECK(classify_prime(Y, sum_sq, 5).f_singular);
  CHECK_FALSE(classify_prime(make_quadric({1, 1, -2}, 5), x3, 5).good);
  CHECK(classify_prime(make_quadric({1, 1, -2}, 5), x3, 5).divides_m);
  CHECK(classify_prime(example_one(), x3, 2).divides_det);
  CHECK(classify_prime(example_one(), x3, 3).good);
}

TEST_CASE("point counts mod p match a scan") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  CHECK(count_points_mod_p(Y, 3) == scan(Y, 3, [](const auto&) { return true; }));
  CHECK(count_points_mod_p(Y, 3) == 6);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::int64_t> coef(-6, 6);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 3;
    std::vector<std::tuple<int, int, std::int64_t>> t;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) t.emplace_back(i, j, coef(rng));
    }
    const AffineQuadric Z(QuadraticForm::from_coefficients(n, t), coef(rng));
    for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL}) {
      if (n == 4 && p > 7) continue;
      CHECK(count_points_mod_p(Z, p) == scan(Z, p, [](const auto&) { return true; }));
    }
  }
}

TEST_CASE("rho examples") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const IntPolynomial x3 = IntPolynomial::variable(3, 2);
  CHECK(rho(Y, x3, 3) == 4);
  CHECK(rho(Y, x3, 9) == 12);
  CHECK(rho(Y, x3, 9) == scan_rho(Y, x3, 9));
  CHECK(rho(Y, x3, 1) == 1);
  const std::vector<std::int64_t> c{1, 0, 0}, zero{0, 0, 0};
  CHECK(rho_linear_constraint(Y, x3, 3, c) == 2);
  CHECK(rho_linear_constraint(Y, x3, 1, c) == 1);
  CHECK(rho_linear_constraint(Y, x3, 45, zero) == rho(Y, x3, 45));
}

TEST_CASE("rho and rho(l; c) match a scan") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const std::vector<IntPolynomial> fs{IntPolynomial::variable(3, 2), poly(3, {{{1, 0, 0}, 1}, {{0, 1, 0}, 1}}),
                                      poly(3, {{{2, 0, 0}, 1}, {{0, 2, 0}, 1}})};
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::int64_t> coord(-20, 20);
  for (const auto& f : fs) {
    for (std::uint64_t ell = 1; ell <= 40; ++ell) {
      CHECK(rho(Y, f, ell) == scan_rho(Y, f, ell));
      CHECK(rho_prime_power(Y, f, 2, 3, {}, true) == scan_rho(Y, f, 8));
      const std::vector<std::int64_t> c{coord(rng), coord(rng), coord(rng)};
      CHECK(rho_linear_constraint(Y, f, ell, c) == scan_rho(Y, f, ell, c));
    }
  }
}

TEST_CASE("rho is multiplicative") {
  const AffineQuadric Y = make_quadric({1, 3, -5}, 2);
  const IntPolynomial f = poly(3, {{{1, 0, 0}, 1}, {{0, 0, 1}, 2}});
  for (std::uint64_t a = 1; a <= 14; ++a) {
    for (std::uint64_t b = 1; a * b <= 200; ++b) {
      if (std::gcd(a, b) != 1) continue;
      CHECK(rho(Y, f, a * b) == rho(Y, f, a) * rho(Y, f, b));
    }
  }
}

TEST_CASE("Hensel recursion at good primes, by lifting") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const IntPolynomial x3 = IntPolynomial::variable(3, 2);
  for (std::uint64_t p : {3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
    REQUIRE(classify_prime(Y, x3, p).good);
    BigInt prev = rho_prime_power(Y, x3, p, 1, {}, true);
    for (int r = 2; r <= 4; ++r) {
      const BigInt next = rho_prime_power(Y, x3, p, r, {}, true);
      CHECK(next == BigInt(p) * prev);
      CHECK(next == rho_prime_power(Y, x3, p, r));
      prev = next;
    }
  }
  CHECK(rho_prime_power(Y, x3, 5, 2, {}, true) == scan_rho(Y, x3, 25));
}

TEST_CASE("rho(p^r) over p^(r(n-2)) stays bounded") {
  const AffineQuadric Y = make_quadric({1, 1, 1, -1}, 1);
  const IntPolynomial x4 = IntPolynomial::variable(4, 3);
  long double worst = 0;
  for (std::uint64_t p : primes_up_to(60)) {
    for (int r = 1; r <= 3; ++r) {
      const BigInt v = rho_prime_power(Y, x4, p, r);
      const long double ratio = static_cast<long double>(v) / powl(static_cast<long double>(p), 2.0L * r);
      worst = std::max(worst, ratio);
    }
  }
  CHECK(worst <= 8);
}

TEST_CASE("densities at p = 3 for x^2 + y^2 - 2z^2 = 1") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const IntPolynomial x3 = IntPolynomial::variable(3, 2);
  const LocalDensityValue point = padic_point_density(Y, 3);
  CHECK(point.value == ExactRational(BigInt(2), BigInt(3)));
  CHECK(point.status == DensityStatus::hensel_shortcut);
  CHECK(point.value == scan_density(Y, 3, 2));

  const LocalDensityValue d = padic_density_f(Y, x3, 2, 3);
  CHECK(d.value == ExactRational(BigInt(14), BigInt(27)));
  CHECK(d.value == scan_density_f(Y, x3, 2, 3, 2));
  CHECK(d.value == scan_density_f(Y, x3, 2, 3, 3));
  CHECK(padic_density_f(Y, x3, 2, 3, {}, true).value == d.value);
}

TEST_CASE("closed forms agree with the resolution tree") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::int64_t> coef(-4, 4);
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + trial % 2;
    std::vector<std::int64_t> d(static_cast<std::size_t>(n));
    for (auto& v : d) v = coef(rng) == 0 ? 1 : coef(rng) | 1;
    const AffineQuadric Y(QuadraticForm::diagonal(d), coef(rng) | 1);
    if (Y.det2B() == 0) continue;
    const IntPolynomial f = IntPolynomial::variable(n, 0) + IntPolynomial::variable(n, n - 1);
    for (std::uint64_t p : {3ULL, 5ULL, 7ULL}) {
      if (!classify_prime(Y, f, p).good) continue;
      ++compared;
      CHECK(padic_point_density(Y, p).value == padic_point_density(Y, p, {}, true).value);
      for (int r = 2; r <= 3; ++r) {
        const auto fast = padic_density_f(Y, f, r, p);
        const auto slow = padic_density_f(Y, f, r, p, {}, true);
        CHECK(fast.status == DensityStatus::hensel_shortcut);
        CHECK(slow.status == DensityStatus::stabilized);
        CHECK(fast.value == slow.value);
        CHECK(padic_density_divisible(Y, f, r, p).value == padic_density_divisible(Y, f, r, p, {}, true).value);
      }
    }
  }
  CHECK(compared > 20);
}

TEST_CASE("bad primes agree with stabilized scans") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const IntPolynomial x3 = IntPolynomial::variable(3, 2);
  // At p = 2 the scan stabilizes once the level passes the valuations involved.
  const auto tree = padic_density_f(Y, x3, 2, 2);
  CHECK(tree.status == DensityStatus::stabilized);
  CHECK(tree.value == scan_density_f(Y, x3, 2, 2, 6));
  CHECK(tree.value == scan_density_f(Y, x3, 2, 2, 7));
  CHECK(padic_point_density(Y, 2).value == scan_density(Y, 2, 6));

  const AffineQuadric Z = make_quadric({1, 3, -3}, 3);
  const auto point = padic_point_density(Z, 3);
  CHECK(point.value == scan_density(Z, 3, 4));
  CHECK(point.value == scan_density(Z, 3, 5));
  const IntPolynomial x1 = IntPolynomial::variable(3, 0);
  CHECK(padic_density_f(Z, x1, 2, 3).value == scan_density_f(Z, x1, 2, 3, 5));

  const auto ex1 = padic_point_density(example_one(), 2);
  CHECK(ex1.status == DensityStatus::stabilized);
  CHECK(ex1.value == scan_density(example_one(), 2, 6));
  CHECK(ex1.value == scan_density(example_one(), 2, 7));
}

TEST_CASE("densities of residue classes") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const std::vector<std::int64_t> xi{1, 0, 0}, off{0, 0, 0};
  CHECK(padic_density_xi(Y, xi, 7, 2).value == padic_point_density(Y, 2).value);
  CHECK(padic_density_xi(Y, xi, 5, 5).value == ExactRational(BigInt(1), BigInt(25)));
  CHECK(padic_density_xi(Y, xi, 5, 5, {}, true).value == ExactRational(BigInt(1), BigInt(25)));
  CHECK(padic_density_xi(Y, off, 5, 5).value.is_zero());

  // Summing the class densities recovers the full density.
  for (std::uint64_t q : {4ULL, 8ULL, 9ULL}) {
    const std::uint64_t p = q % 2 == 0 ? 2 : 3;
    ExactRational total;
    oracle::for_each_residue(3, q, [&](const std::vector<std::uint64_t>& x) {
      const std::vector<std::int64_t> xs(x.begin(), x.end());
      total += padic_density_xi(Y, xs, q, p).value;
    });
    CHECK(total == padic_point_density(Y, p).value);
  }
}

TEST_CASE("divisible and non-divisible densities are complementary") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const std::vector<IntPolynomial> fs{IntPolynomial::variable(3, 2), poly(3, {{{1, 0, 0}, 1}, {{0, 1, 0}, 1}}),
                                      poly(3, {{{2, 0, 0}, 1}, {{0, 2, 0}, 1}})};
  for (const auto& f : fs) {
    for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL}) {
      for (int r = 2; r <= 3; ++r) {
        const ExactRational A = padic_point_density(Y, p).value;
        const ExactRational M = padic_density_divisible(Y, f, r, p).value;
        CHECK(A - M == padic_density_f(Y, f, r, p).value);
        // M as a sum over the classes xi mod p^r with f(xi) = 0 mod p^r.
        if (p <= 3) {
          const std::uint64_t q = checked_pow(p, r);
          ExactRational literal;
          oracle::for_each_residue(3, q, [&](const std::vector<std::uint64_t>& x) {
            if (!on_quadric(Y, x, q) || oracle::poly_mod(f, x, q) != 0) return;
            const std::vector<std::int64_t> xs(x.begin(), x.end());
            literal += padic_density_xi(Y, xs, q, p).value;
          });
          CHECK(literal == M);
        }
      }
    }
  }
}

TEST_CASE("local solubility") {
  const AffineQuadric Y = example_one();
  for (std::uint64_t p : primes_up_to(97)) CHECK(is_locally_soluble(Y, p, 4) == Solubility::soluble);
  CHECK(is_locally_soluble(make_quadric({1, 1}, 3), 3, 2) == Solubility::insoluble);
  CHECK(is_locally_soluble(make_quadric({1, 1, -2}, 1), 2, 1) == Solubility::unknown);
  CHECK(is_locally_soluble(make_quadric({1, 1, -2}, 1), 2, 3) == Solubility::soluble);
  CHECK(padic_point_density(make_quadric({1, 1}, 3), 3).value.is_zero());
}

TEST_CASE("r-power divisors") {
  const AffineQuadric Y = make_quadric({1, 1, -2}, 1);
  const IntPolynomial x3 = IntPolynomial::variable(3, 2);
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL}) CHECK_FALSE(has_r_power_divisor_at(Y, x3, p, 2));
  const IntPolynomial nine_x3 = poly(3, {{{0, 0, 1}, 9}});
  CHECK(has_r_power_divisor_at(Y, nine_x3, 3, 2));
  CHECK_FALSE(has_r_power_divisor_at(Y, nine_x3, 3, 3));
  const IntPolynomial x3_squared = poly(3, {{{0, 0, 2}, 1}});
  CHECK_FALSE(has_r_power_divisor_at(Y, x3_squared, 3, 2));
  CHECK(has_r_power_divisor_at(Y, poly(3, {{{0, 0, 1}, 4}}), 2, 2));
}
