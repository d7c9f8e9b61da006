#include "powerfree/rational.hpp"

#include "powerfree/errors.hpp"

namespace powerfree {

ExactRational::ExactRational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw PreconditionError("ExactRational: zero denominator");
  value_ = den < 0 ? boost::multiprecision::cpp_rational(BigInt(-num), BigInt(-den))
                   : boost::multiprecision::cpp_rational(num, den);
}

ExactRational& ExactRational::operator/=(const ExactRational& o) {
  if (o.is_zero()) throw PreconditionError("ExactRational: division by zero");
  value_ /= o.value_;
  return *this;
}

std::string ExactRational::to_string() const {
  const BigInt den = denominator();
  if (den == 1) return numerator().str();
  return numerator().str() + "/" + den.str();
}

ExactRational ExactRational::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return ExactRational(BigInt(text));
    return ExactRational(BigInt(text.substr(0, slash)), BigInt(text.substr(slash + 1)));
  } catch (const std::runtime_error&) {
    throw ValidationError("not a rational number: " + text);
  }
}

Real80 ExactRational::to_real80() const {
  return Real80(numerator()) / Real80(denominator());
}

double ExactRational::to_double() const { return static_cast<double>(to_real80()); }

ExactRational ExactRational::power(std::uint64_t p, int e) {
  BigInt pe = boost::multiprecision::pow(BigInt(p), static_cast<unsigned>(e < 0 ? -e : e));
  if (e >= 0) return ExactRational(pe);
  return ExactRational(BigInt(1), pe);
}

}  // namespace powerfree
