#pragma once

#include <compare>
#include <ostream>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "powerfree/arith.hpp"

namespace powerfree {

/// Exact rational in lowest terms with positive denominator.
class ExactRational {
 public:
  ExactRational() = default;
  ExactRational(std::int64_t n) : value_(n) {}  // NOLINT(google-explicit-constructor)
  ExactRational(const BigInt& n) : value_(n) {}  // NOLINT(google-explicit-constructor)
  ExactRational(const BigInt& num, const BigInt& den);

  BigInt numerator() const { return boost::multiprecision::numerator(value_); }
  BigInt denominator() const { return boost::multiprecision::denominator(value_); }

  bool is_zero() const { return value_ == 0; }
  int sign() const { return value_.sign(); }

  /// "num/den", or "num" for integers.
  std::string to_string() const;
  /// Parses "num/den" or "num".
  static ExactRational parse(const std::string& text);

  /// Round-to-nearest at 80 significant bits, then to double.
  Real80 to_real80() const;
  double to_double() const;

  /// p^e for possibly negative e.
  static ExactRational power(std::uint64_t p, int e);

  ExactRational& operator+=(const ExactRational& o) { value_ += o.value_; return *this; }
  ExactRational& operator-=(const ExactRational& o) { value_ -= o.value_; return *this; }
  ExactRational& operator*=(const ExactRational& o) { value_ *= o.value_; return *this; }
  ExactRational& operator/=(const ExactRational& o);

  friend ExactRational operator+(ExactRational a, const ExactRational& b) { return a += b; }
  friend ExactRational operator-(ExactRational a, const ExactRational& b) { return a -= b; }
  friend ExactRational operator*(ExactRational a, const ExactRational& b) { return a *= b; }
  friend ExactRational operator/(ExactRational a, const ExactRational& b) { return a /= b; }
  friend ExactRational operator-(const ExactRational& a) { return ExactRational(-a.value_); }

  friend bool operator==(const ExactRational& a, const ExactRational& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const ExactRational& a, const ExactRational& b) {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, const ExactRational& r) { return os << r.to_string(); }

 private:
  explicit ExactRational(boost::multiprecision::cpp_rational v) : value_(std::move(v)) {}
  boost::multiprecision::cpp_rational value_;
};

}  // namespace powerfree
