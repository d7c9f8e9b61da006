#pragma once

// Exact integer and modular arithmetic shared by every other module.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace powerfree {

using BigInt = boost::multiprecision::cpp_int;
using i128 = __int128;
using u128 = unsigned __int128;

/// Real numbers rounded to nearest at 80 significant bits.
using Real80 = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<80, boost::multiprecision::digit_base_2>>;

struct PrimePower {
  std::uint64_t prime = 0;
  int exponent = 0;
  bool operator==(const PrimePower&) const = default;
};

/// n = prod p^e with strictly increasing primes.
struct Factorization {
  std::uint64_t value = 1;
  std::vector<PrimePower> factors;

  int omega() const noexcept { return static_cast<int>(factors.size()); }
  std::uint64_t divisor_count() const noexcept;
  std::string to_string() const;
};

/// Largest input accepted by factorize().
inline constexpr std::uint64_t kMaxFactorizable = std::uint64_t{1} << 63;

bool is_prime(std::uint64_t n) noexcept;

/// Deterministic factorization: trial division up to 2^21, then a
/// deterministic Miller-Rabin test and Pollard-Brent on the cofactor.
/// Throws ArithmeticOverflow for n > 2^63 and PreconditionError for n = 0.
Factorization factorize(std::uint64_t n);

/// Moebius function; PreconditionError for n = 0.
int mobius(std::uint64_t n);

/// True iff N is not divisible by p^r for any prime p. Zero is never r-free;
/// negative N are judged by |N|.
bool is_r_free(std::int64_t N, int r);
bool is_r_free(const BigInt& N, int r);

/// #{x mod q : x^2 = d mod q}.
std::uint64_t count_square_roots_mod(std::uint64_t q, std::int64_t d);
std::uint64_t count_square_roots_mod(std::uint64_t q, const BigInt& d);

/// gcd(l, v_1, ..., v_k); the empty vector (or v = 0) gives l.
std::uint64_t gcd_with_vector(std::uint64_t l, std::span<const std::int64_t> v);

/// Primes p <= limit in increasing order.
std::vector<std::uint64_t> primes_up_to(std::uint64_t limit);

/// Squarefree integers' Moebius values mu(1..limit); index 0 unused.
std::vector<signed char> mobius_table(std::uint64_t limit);

/// p-adic valuation; returns `cap` for zero.
int valuation(std::int64_t value, std::uint64_t p, int cap = 1'000'000) noexcept;
int valuation(const BigInt& value, std::uint64_t p, int cap = 1'000'000);

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) noexcept;
std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) noexcept;
/// Reduces a signed value into [0, m).
std::uint64_t reduce_mod(std::int64_t a, std::uint64_t m) noexcept;
std::uint64_t reduce_mod(i128 a, std::uint64_t m) noexcept;
std::uint64_t reduce_mod(const BigInt& a, std::uint64_t m);

/// Legendre symbol (a/p) for an odd prime p.
int legendre(std::uint64_t a, std::uint64_t p) noexcept;

/// p^e with overflow detection (ArithmeticOverflow).
std::uint64_t checked_pow(std::uint64_t p, int e);

/// floor(sqrt(n)) and exact-square test for non-negative 64-bit values.
std::uint64_t isqrt(std::uint64_t n) noexcept;
bool is_square(std::uint64_t n, std::uint64_t* root = nullptr) noexcept;
bool is_square(const BigInt& n, BigInt* root = nullptr);

std::string to_string(i128 v);

}  // namespace powerfree
