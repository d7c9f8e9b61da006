#pragma once

// Quadratic forms, affine quadrics Q(x) = m and integer polynomials.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "powerfree/arith.hpp"
#include "powerfree/rational.hpp"

namespace powerfree {

using IntVec = std::vector<std::int64_t>;

/// Q = sum_k coefficient_k * (form_k . x)^2 over the rationals.
struct DiagonalTerm {
  ExactRational coefficient;
  std::vector<ExactRational> form;
};

/// Q(x) = sum_{i<=j} a_ij x_i x_j, stored through its doubled Gram matrix 2B
/// ((2B)_ii = 2 a_ii, (2B)_ij = a_ij), so Q(x) = x^T (2B) x / 2.
class QuadraticForm {
 public:
  QuadraticForm() = default;
  explicit QuadraticForm(int n);

  /// Triples (i, j, a_ij) with 0-based indices; (i, j) and (j, i) are the same
  /// monomial and repeated triples accumulate.
  static QuadraticForm from_coefficients(int n, std::span<const std::tuple<int, int, std::int64_t>> terms);
  /// Throws ValidationError unless `gram` is symmetric with an even diagonal.
  static QuadraticForm from_doubled_gram(int n, IntVec gram);
  static QuadraticForm diagonal(std::span<const std::int64_t> coefficients);

  int n() const noexcept { return n_; }
  std::int64_t gram(int i, int j) const noexcept { return gram_[static_cast<std::size_t>(i * n_ + j)]; }
  /// a_ij for the monomial x_i x_j (a_ii for squares).
  std::int64_t coeff(int i, int j) const noexcept { return i == j ? gram(i, i) / 2 : gram(i, j); }
  const IntVec& doubled_gram() const noexcept { return gram_; }
  bool is_zero() const noexcept;

  BigInt eval(std::span<const std::int64_t> x) const;
  /// False if some intermediate leaves 128 bits.
  bool eval_i128(std::span<const std::int64_t> x, i128& out) const noexcept;
  ExactRational eval(std::span<const ExactRational> x) const;
  long double eval_real(std::span<const long double> x) const noexcept;

  /// (2B) x, which is the gradient of Q at x. Throws ArithmeticOverflow.
  IntVec gradient(std::span<const std::int64_t> x) const;

  BigInt det2B() const;
  int rank() const;
  /// Rank of 2B over F_p.
  int rank_mod(std::uint64_t p) const;
  std::vector<DiagonalTerm> diagonalize() const;
  /// (positive, negative) inertia of 2B.
  std::pair<int, int> signature() const;

  /// The form y -> Q(U y) for an n x n row-major matrix U.
  QuadraticForm transform(std::span<const std::int64_t> U) const;

  std::string to_string() const;
  bool operator==(const QuadraticForm&) const = default;

 private:
  int n_ = 0;
  IntVec gram_;
};

class IntPolynomial {
 public:
  using Exponents = std::vector<int>;

  IntPolynomial() = default;
  explicit IntPolynomial(int n) : n_(n) {}
  static IntPolynomial variable(int n, int i);
  static IntPolynomial constant(int n, std::int64_t c);

  /// Adds c * x^e, merging with an existing monomial; zero terms vanish.
  void add_term(const Exponents& e, std::int64_t c);

  int n() const noexcept { return n_; }
  int degree() const noexcept;
  bool homogeneous() const noexcept;
  bool is_zero() const noexcept { return terms_.empty(); }
  const std::map<Exponents, std::int64_t>& terms() const noexcept { return terms_; }
  bool depends_on(int i) const noexcept;
  /// Sum of |coefficients|; bounds |f(x)| by C_f |x|^d for |x| >= 1.
  std::uint64_t coefficient_norm() const;
  /// The homogeneous part of top degree.
  IntPolynomial leading_form() const;

  BigInt eval(std::span<const std::int64_t> x) const;
  bool eval_i128(std::span<const std::int64_t> x, i128& out) const noexcept;
  /// f(x) mod `mod` for residues x_i in [0, mod).
  std::uint64_t eval_mod(std::span<const std::uint64_t> x, std::uint64_t mod) const noexcept;
  long double eval_real(std::span<const long double> x) const noexcept;

  IntPolynomial derivative(int i) const;
  /// y -> f(U y) for an n x n row-major matrix U.
  IntPolynomial transform(std::span<const std::int64_t> U) const;

  std::string to_string() const;
  bool operator==(const IntPolynomial&) const = default;

  friend IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b);
  friend IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b);
  friend IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b);

 private:
  int n_ = 0;
  std::map<Exponents, std::int64_t> terms_;
};

struct ValidationItem {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool ok() const noexcept;
};

/// The quadric Q(x) = m with cached invariants.
class AffineQuadric {
 public:
  AffineQuadric() = default;
  AffineQuadric(QuadraticForm form, std::int64_t m);

  const QuadraticForm& form() const noexcept { return form_; }
  int n() const noexcept { return form_.n(); }
  std::int64_t m() const noexcept { return m_; }
  const BigInt& det2B() const noexcept { return det2B_; }
  std::pair<int, int> signature() const noexcept { return signature_; }

  ValidationReport validate() const;
  /// Throws ValidationError carrying the failed items.
  void require_valid() const;

  /// Number of connected components of Y(R): 2 for two-sheeted quadrics.
  int component_count() const noexcept { return split_form_.empty() ? 1 : 2; }
  /// 0 on a connected Y(R); on two sheets, 1 where the separating linear form
  /// is positive and 0 where it is negative.
  int component_of(std::span<const long double> x) const noexcept;
  int component_of(std::span<const std::int64_t> x) const noexcept;
  /// Linear form whose sign separates the sheets (empty when connected).
  const std::vector<ExactRational>& separating_form() const noexcept { return split_exact_; }

  bool contains(std::span<const std::int64_t> x) const;

 private:
  QuadraticForm form_;
  std::int64_t m_ = 0;
  BigInt det2B_;
  std::pair<int, int> signature_{0, 0};
  std::vector<ExactRational> split_exact_;
  std::vector<long double> split_form_;
};

/// q(t) = quad(t) + linear . t + constant.
struct QuadraticPolynomial {
  QuadraticForm quad;
  IntVec linear;
  std::int64_t constant = 0;

  int n() const noexcept { return quad.n(); }
  /// Throws PreconditionError if deg f > 2.
  static QuadraticPolynomial from_polynomial(const IntPolynomial& f);
  /// Q(x) - m.
  static QuadraticPolynomial from_quadric(const AffineQuadric& Y);
  IntPolynomial to_polynomial() const;
  BigInt eval(std::span<const std::int64_t> x) const;
};

struct Homogenization {
  QuadraticForm R;   // variables (X_0, X_1, ..., X_nu)
  QuadraticForm q0;  // R at X_0 = 0, in (X_1, ..., X_nu)
};

Homogenization homogenize(const IntPolynomial& q);
Homogenization homogenize(const QuadraticPolynomial& q);

struct NonsingularityCheck {
  bool nonsingular = true;
  bool exact = true;
};

/// Whether the gradient of the homogeneous form f has a nonzero common zero
/// over F_p. Exhaustive over projective space when that has at most ~10^6
/// points, otherwise a deterministic random search (exact = false).
NonsingularityCheck is_nonsingular_form_mod_p(const IntPolynomial& f, std::uint64_t p);

/// -m * det2B / 8 reduced; used for the ternary nonsquare condition.
ExactRational ternary_discriminant(const AffineQuadric& Y);
bool is_rational_square(const ExactRational& q);

/// Bareiss determinant of a square integer matrix (row-major).
BigInt determinant(std::span<const std::int64_t> matrix, int n);

}  // namespace powerfree
