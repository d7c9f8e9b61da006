#include "powerfree/arith.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/multiprecision/miller_rabin.hpp>

#include "powerfree/errors.hpp"

namespace powerfree {
namespace {

constexpr std::uint64_t kTrialLimit = std::uint64_t{1} << 21;

const std::vector<std::uint64_t>& trial_primes() {
  static const std::vector<std::uint64_t> primes = primes_up_to(kTrialLimit);
  return primes;
}

std::uint64_t abs_u64(std::int64_t v) noexcept {
  return v < 0 ? std::uint64_t(0) - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
}

// Pollard-Brent with a fixed seed sequence; n is odd, composite, not a square.
std::uint64_t pollard_brent(std::uint64_t n) {
  for (std::uint64_t c = 1;; ++c) {
    auto f = [&](std::uint64_t x) { return (mulmod(x, x, n) + c) % n; };
    std::uint64_t y = 2, x = 2, g = 1, q = 1, ys = 2;
    std::uint64_t r = 1;
    constexpr std::uint64_t m = 128;
    do {
      x = y;
      for (std::uint64_t i = 0; i < r; ++i) y = f(y);
      std::uint64_t k = 0;
      do {
        ys = y;
        for (std::uint64_t i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = mulmod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += m;
      } while (k < r && g == 1);
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

// #{x mod p^e : x^2 = d mod p^e}, d already reduced mod p^e.
std::uint64_t square_roots_prime_power(std::uint64_t p, int e, std::uint64_t pe, std::uint64_t d) {
  if (d % pe == 0) return checked_pow(p, e / 2);
  int v = 0;
  while (d % p == 0) {
    d /= p;
    ++v;
  }
  if (v % 2 != 0) return 0;
  const int rest = e - v;
  const std::uint64_t lift = checked_pow(p, v / 2);
  if (p != 2) return legendre(d % p, p) == 1 ? 2 * lift : 0;
  if (rest == 1) return lift;
  if (rest == 2) return d % 4 == 1 ? 2 * lift : 0;
  return d % 8 == 1 ? 4 * lift : 0;
}

}  // namespace

std::uint64_t Factorization::divisor_count() const noexcept {
  std::uint64_t tau = 1;
  for (const auto& f : factors) tau *= static_cast<std::uint64_t>(f.exponent + 1);
  return tau;
}

std::string Factorization::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) os << ',';
    os << '(' << factors[i].prime << ',' << factors[i].exponent << ')';
  }
  os << ']';
  return os.str();
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) noexcept {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) noexcept {
  if (m == 1) return 0;
  std::uint64_t result = 1;
  base %= m;
  while (exp) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

std::uint64_t reduce_mod(std::int64_t a, std::uint64_t m) noexcept {
  const i128 r = static_cast<i128>(a) % static_cast<i128>(m);
  return static_cast<std::uint64_t>(r < 0 ? r + m : r);
}

std::uint64_t reduce_mod(i128 a, std::uint64_t m) noexcept {
  const i128 r = a % static_cast<i128>(m);
  return static_cast<std::uint64_t>(r < 0 ? r + m : r);
}

std::uint64_t reduce_mod(const BigInt& a, std::uint64_t m) {
  BigInt r = a % m;
  if (r < 0) r += m;
  return static_cast<std::uint64_t>(r);
}

int legendre(std::uint64_t a, std::uint64_t p) noexcept {
  a %= p;
  if (a == 0) return 0;
  return powmod(a, (p - 1) / 2, p) == 1 ? 1 : -1;
}

std::uint64_t checked_pow(std::uint64_t p, int e) {
  std::uint64_t out = 1;
  for (int i = 0; i < e; ++i) {
    if (__builtin_mul_overflow(out, p, &out)) throw ArithmeticOverflow("p^e exceeds 64 bits");
  }
  return out;
}

std::uint64_t isqrt(std::uint64_t n) noexcept {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && static_cast<u128>(r) * r > n) --r;
  while (static_cast<u128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

bool is_square(std::uint64_t n, std::uint64_t* root) noexcept {
  const std::uint64_t r = isqrt(n);
  if (root) *root = r;
  return r * r == n;
}

bool is_square(const BigInt& n, BigInt* root) {
  if (n < 0) return false;
  BigInt r = boost::multiprecision::sqrt(n);
  const bool ok = r * r == n;
  if (root) *root = std::move(r);
  return ok;
}

bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These bases are a deterministic witness set for all n < 2^64.
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t limit) {
  std::vector<std::uint64_t> primes;
  if (limit < 2) return primes;
  std::vector<bool> composite(limit + 1, false);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

std::vector<signed char> mobius_table(std::uint64_t limit) {
  std::vector<signed char> mu(limit + 1, 1);
  mu[0] = 0;
  std::vector<bool> composite(limit + 1, false);
  for (std::uint64_t p = 2; p <= limit; ++p) {
    if (composite[p]) continue;
    for (std::uint64_t j = p; j <= limit; j += p) {
      if (j > p) composite[j] = true;
      mu[j] = static_cast<signed char>(-mu[j]);
    }
    if (p <= limit / p) {
      for (std::uint64_t j = p * p; j <= limit; j += p * p) mu[j] = 0;
    }
  }
  return mu;
}

Factorization factorize(std::uint64_t n) {
  if (n == 0) throw PreconditionError("factorize: n must be positive");
  if (n > kMaxFactorizable) throw ArithmeticOverflow("factorize: n exceeds 2^63");
  Factorization out;
  out.value = n;
  for (std::uint64_t p : trial_primes()) {
    if (p * p > n) break;
    if (n % p) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.factors.push_back({p, e});
  }
  if (n == 1) return out;
  if (is_prime(n)) {
    out.factors.push_back({n, 1});
    return out;
  }
  // Every prime factor now exceeds 2^21 and n <= 2^63, so n = q^2 or q*s.
  std::uint64_t root = 0;
  if (is_square(n, &root)) {
    out.factors.push_back({root, 2});
    return out;
  }
  std::uint64_t a = pollard_brent(n);
  std::uint64_t b = n / a;
  if (a > b) std::swap(a, b);
  out.factors.push_back({a, 1});
  out.factors.push_back({b, 1});
  return out;
}

int mobius(std::uint64_t n) {
  if (n == 0) throw PreconditionError("mobius: n must be positive");
  const Factorization f = factorize(n);
  for (const auto& pp : f.factors) {
    if (pp.exponent > 1) return 0;
  }
  return f.omega() % 2 == 0 ? 1 : -1;
}

namespace {

BigInt pollard_brent_big(const BigInt& n) {
  for (unsigned c = 1;; ++c) {
    auto f = [&](const BigInt& x) { return BigInt((x * x + c) % n); };
    BigInt y = 2, x = 2, g = 1, q = 1, ys = 2;
    std::uint64_t r = 1;
    constexpr std::uint64_t m = 128;
    do {
      x = y;
      for (std::uint64_t i = 0; i < r; ++i) y = f(y);
      std::uint64_t k = 0;
      do {
        ys = y;
        for (std::uint64_t i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = (q * (x > y ? BigInt(x - y) : BigInt(y - x))) % n;
        }
        g = boost::multiprecision::gcd(q, n);
        k += m;
      } while (k < r && g == 1);
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = boost::multiprecision::gcd(x > ys ? BigInt(x - ys) : BigInt(ys - x), n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

// Prime factors of n (with multiplicity); n has no factor below the trial limit.
void split_big(const BigInt& n, std::vector<BigInt>& out) {
  if (n == 1) return;
  if (n <= kMaxFactorizable) {
    for (const auto& pp : factorize(static_cast<std::uint64_t>(n)).factors) {
      for (int e = 0; e < pp.exponent; ++e) out.emplace_back(pp.prime);
    }
    return;
  }
  if (boost::multiprecision::miller_rabin_test(n, 25)) {
    out.push_back(n);
    return;
  }
  BigInt root;
  if (is_square(n, &root)) {
    split_big(root, out);
    split_big(root, out);
    return;
  }
  const BigInt a = pollard_brent_big(n);
  split_big(a, out);
  split_big(BigInt(n / a), out);
}

bool is_r_free_u64(std::uint64_t n, int r) {
  if (n == 0) return false;
  for (std::uint64_t p : trial_primes()) {
    // Once p^r > n no prime >= p can divide n to the r-th power.
    u128 pr = 1;
    for (int i = 0; i < r && pr <= n; ++i) pr *= p;
    if (pr > n) return true;
    if (n % p) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e >= r) return false;
  }
  // Remaining prime factors exceed 2^21: n is 1, q, q*s or q^2.
  if (n == 1 || r >= 3) return true;
  return !is_square(n);
}

}  // namespace

bool is_r_free(std::int64_t N, int r) {
  if (r < 2) throw PreconditionError("is_r_free: r must be >= 2");
  return is_r_free_u64(abs_u64(N), r);
}

bool is_r_free(const BigInt& N, int r) {
  if (r < 2) throw PreconditionError("is_r_free: r must be >= 2");
  BigInt n = boost::multiprecision::abs(N);
  if (n == 0) return false;
  if (n <= std::numeric_limits<std::uint64_t>::max() / 2) return is_r_free_u64(static_cast<std::uint64_t>(n), r);
  for (std::uint64_t p : trial_primes()) {
    if (n % p != 0) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e >= r) return false;
    if (n <= kMaxFactorizable) return is_r_free_u64(static_cast<std::uint64_t>(n), r);
  }
  if (n <= kMaxFactorizable) return is_r_free_u64(static_cast<std::uint64_t>(n), r);
  // Large cofactor without small primes: split it completely.
  std::vector<BigInt> primes;
  split_big(n, primes);
  std::sort(primes.begin(), primes.end());
  for (std::size_t i = 0; i < primes.size();) {
    std::size_t j = i;
    while (j < primes.size() && primes[j] == primes[i]) ++j;
    if (static_cast<int>(j - i) >= r) return false;
    i = j;
  }
  return true;
}

std::uint64_t count_square_roots_mod(std::uint64_t q, std::int64_t d) {
  if (q == 0) throw PreconditionError("count_square_roots_mod: q must be positive");
  const Factorization f = factorize(q);
  std::uint64_t total = 1;
  for (const auto& [p, e] : f.factors) {
    const std::uint64_t pe = checked_pow(p, e);
    total *= square_roots_prime_power(p, e, pe, reduce_mod(d, pe));
  }
  return total;
}

std::uint64_t count_square_roots_mod(std::uint64_t q, const BigInt& d) {
  if (q == 0) throw PreconditionError("count_square_roots_mod: q must be positive");
  const Factorization f = factorize(q);
  std::uint64_t total = 1;
  for (const auto& [p, e] : f.factors) {
    const std::uint64_t pe = checked_pow(p, e);
    total *= square_roots_prime_power(p, e, pe, reduce_mod(d, pe));
  }
  return total;
}

std::uint64_t gcd_with_vector(std::uint64_t l, std::span<const std::int64_t> v) {
  if (l == 0) throw PreconditionError("gcd_with_vector: l must be positive");
  std::uint64_t g = l;
  for (std::int64_t x : v) g = std::gcd(g, abs_u64(x));
  return g;
}

int valuation(std::int64_t value, std::uint64_t p, int cap) noexcept {
  if (value == 0) return cap;
  std::uint64_t n = abs_u64(value);
  int v = 0;
  while (n % p == 0 && v < cap) {
    n /= p;
    ++v;
  }
  return v;
}

int valuation(const BigInt& value, std::uint64_t p, int cap) {
  if (value == 0) return cap;
  BigInt n = boost::multiprecision::abs(value);
  int v = 0;
  while (n % p == 0 && v < cap) {
    n /= p;
    ++v;
  }
  return v;
}

std::string to_string(i128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  u128 u = neg ? u128(0) - static_cast<u128>(v) : static_cast<u128>(v);
  std::string s;
  while (u) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

}  // namespace powerfree
