#include "powerfree/forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "powerfree/errors.hpp"

namespace powerfree {
namespace {

std::int64_t add_checked(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw ArithmeticOverflow("integer coefficient overflow");
  return out;
}

std::int64_t mul_checked(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw ArithmeticOverflow("integer coefficient overflow");
  return out;
}

std::int64_t to_int64(const BigInt& v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw ArithmeticOverflow("value exceeds 64 bits");
  }
  return static_cast<std::int64_t>(v);
}

std::string monomial_name(const IntPolynomial::Exponents& e) {
  std::string s;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!s.empty()) s += '*';
    s += "x" + std::to_string(i + 1);
    if (e[i] > 1) s += "^" + std::to_string(e[i]);
  }
  return s;
}

std::string join_terms(const std::vector<std::pair<std::int64_t, std::string>>& terms) {
  if (terms.empty()) return "0";
  std::string out;
  for (const auto& [c, name] : terms) {
    const bool neg = c < 0;
    const std::uint64_t mag = neg ? std::uint64_t(0) - static_cast<std::uint64_t>(c) : static_cast<std::uint64_t>(c);
    if (out.empty()) {
      if (neg) out += "-";
    } else {
      out += neg ? " - " : " + ";
    }
    if (name.empty()) {
      out += std::to_string(mag);
    } else {
      if (mag != 1) out += std::to_string(mag) + "*";
      out += name;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- QuadraticForm

QuadraticForm::QuadraticForm(int n) : n_(n), gram_(static_cast<std::size_t>(n * n), 0) {
  if (n < 1) throw PreconditionError("QuadraticForm: n must be positive");
}

QuadraticForm QuadraticForm::from_coefficients(int n,
                                               std::span<const std::tuple<int, int, std::int64_t>> terms) {
  QuadraticForm q(n);
  for (auto [i, j, c] : terms) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw ValidationError("quadratic form index out of range");
    if (i > j) std::swap(i, j);
    auto& gij = q.gram_[static_cast<std::size_t>(i * n + j)];
    if (i == j) {
      gij = add_checked(gij, mul_checked(2, c));
    } else {
      gij = add_checked(gij, c);
      q.gram_[static_cast<std::size_t>(j * n + i)] = gij;
    }
  }
  return q;
}

QuadraticForm QuadraticForm::from_doubled_gram(int n, IntVec gram) {
  if (gram.size() != static_cast<std::size_t>(n * n)) throw ValidationError("doubled Gram matrix has wrong size");
  QuadraticForm q(n);
  for (int i = 0; i < n; ++i) {
    if (gram[static_cast<std::size_t>(i * n + i)] % 2 != 0) throw ValidationError("doubled Gram diagonal must be even");
    for (int j = 0; j < i; ++j) {
      if (gram[static_cast<std::size_t>(i * n + j)] != gram[static_cast<std::size_t>(j * n + i)]) {
        throw ValidationError("doubled Gram matrix must be symmetric");
      }
    }
  }
  q.gram_ = std::move(gram);
  return q;
}

QuadraticForm QuadraticForm::diagonal(std::span<const std::int64_t> coefficients) {
  const int n = static_cast<int>(coefficients.size());
  QuadraticForm q(n);
  for (int i = 0; i < n; ++i) q.gram_[static_cast<std::size_t>(i * n + i)] = mul_checked(2, coefficients[i]);
  return q;
}

bool QuadraticForm::is_zero() const noexcept {
  return std::all_of(gram_.begin(), gram_.end(), [](std::int64_t v) { return v == 0; });
}

bool QuadraticForm::eval_i128(std::span<const std::int64_t> x, i128& out) const noexcept {
  i128 acc = 0;
  for (int i = 0; i < n_; ++i) {
    if (x[i] == 0) continue;
    for (int j = i; j < n_; ++j) {
      const std::int64_t a = coeff(i, j);
      if (a == 0 || x[j] == 0) continue;
      const i128 xx = static_cast<i128>(x[i]) * x[j];
      i128 term;
      if (__builtin_mul_overflow(xx, static_cast<i128>(a), &term)) return false;
      if (__builtin_add_overflow(acc, term, &acc)) return false;
    }
  }
  out = acc;
  return true;
}

BigInt QuadraticForm::eval(std::span<const std::int64_t> x) const {
  if (x.size() != static_cast<std::size_t>(n_)) throw PreconditionError("eval_form: dimension mismatch");
  i128 fast;
  if (eval_i128(x, fast)) {
    BigInt out = static_cast<std::int64_t>(fast >> 64);
    out <<= 64;
    out += static_cast<std::uint64_t>(fast);
    return out;
  }
  BigInt acc = 0;
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) acc += BigInt(coeff(i, j)) * x[i] * x[j];
  }
  return acc;
}

ExactRational QuadraticForm::eval(std::span<const ExactRational> x) const {
  if (x.size() != static_cast<std::size_t>(n_)) throw PreconditionError("eval_form: dimension mismatch");
  ExactRational acc;
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      const std::int64_t a = coeff(i, j);
      if (a != 0) acc += ExactRational(a) * x[i] * x[j];
    }
  }
  return acc;
}

long double QuadraticForm::eval_real(std::span<const long double> x) const noexcept {
  long double acc = 0;
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) acc += static_cast<long double>(coeff(i, j)) * x[i] * x[j];
  }
  return acc;
}

IntVec QuadraticForm::gradient(std::span<const std::int64_t> x) const {
  if (x.size() != static_cast<std::size_t>(n_)) throw PreconditionError("gradient: dimension mismatch");
  IntVec g(static_cast<std::size_t>(n_), 0);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) g[i] = add_checked(g[i], mul_checked(gram(i, j), x[j]));
  }
  return g;
}

BigInt determinant(std::span<const std::int64_t> matrix, int n) {
  std::vector<BigInt> a(matrix.begin(), matrix.end());
  auto at = [&](int i, int j) -> BigInt& { return a[static_cast<std::size_t>(i * n + j)]; };
  BigInt prev = 1;
  int sign = 1;
  for (int k = 0; k < n; ++k) {
    if (at(k, k) == 0) {
      int swap_row = -1;
      for (int i = k + 1; i < n; ++i) {
        if (at(i, k) != 0) {
          swap_row = i;
          break;
        }
      }
      if (swap_row < 0) return 0;
      for (int j = 0; j < n; ++j) std::swap(at(k, j), at(swap_row, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
    }
    prev = at(k, k);
  }
  return sign * at(n - 1, n - 1);
}

BigInt QuadraticForm::det2B() const { return determinant(gram_, n_); }

int QuadraticForm::rank() const {
  std::vector<BigInt> a(gram_.begin(), gram_.end());
  auto at = [&](int i, int j) -> BigInt& { return a[static_cast<std::size_t>(i * n_ + j)]; };
  int rank = 0;
  BigInt prev = 1;
  for (int col = 0; col < n_ && rank < n_; ++col) {
    int pivot = -1;
    for (int i = rank; i < n_; ++i) {
      if (at(i, col) != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot < 0) continue;
    for (int j = 0; j < n_; ++j) std::swap(at(rank, j), at(pivot, j));
    for (int i = rank + 1; i < n_; ++i) {
      for (int j = col + 1; j < n_; ++j) at(i, j) = (at(i, j) * at(rank, col) - at(i, col) * at(rank, j)) / prev;
      at(i, col) = 0;
    }
    prev = at(rank, col);
    ++rank;
  }
  return rank;
}

int QuadraticForm::rank_mod(std::uint64_t p) const {
  std::vector<std::uint64_t> a(gram_.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = reduce_mod(gram_[i], p);
  auto at = [&](int i, int j) -> std::uint64_t& { return a[static_cast<std::size_t>(i * n_ + j)]; };
  int rank = 0;
  for (int col = 0; col < n_ && rank < n_; ++col) {
    int pivot = -1;
    for (int i = rank; i < n_; ++i) {
      if (at(i, col) != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot < 0) continue;
    for (int j = 0; j < n_; ++j) std::swap(at(rank, j), at(pivot, j));
    const std::uint64_t inv = powmod(at(rank, col), p - 2, p);
    for (int i = rank + 1; i < n_; ++i) {
      const std::uint64_t factor = mulmod(at(i, col), inv, p);
      if (factor == 0) continue;
      for (int j = col; j < n_; ++j) at(i, j) = (at(i, j) + p - mulmod(factor, at(rank, j), p)) % p;
    }
    ++rank;
  }
  return rank;
}

std::vector<DiagonalTerm> QuadraticForm::diagonalize() const {
  // Q(x) = x^T G x / 2. Peeling off direction u with u^T G u != 0 leaves
  // G' = G - (Gu)(Gu)^T / (u^T G u), and contributes (Gu . x)^2 / (2 u^T G u).
  const auto N = static_cast<std::size_t>(n_);
  std::vector<ExactRational> G(gram_.begin(), gram_.end());
  auto at = [&](std::size_t i, std::size_t j) -> ExactRational& { return G[i * N + j]; };
  std::vector<DiagonalTerm> out;
  for (;;) {
    std::vector<ExactRational> u(N);
    bool found = false;
    for (std::size_t i = 0; i < N && !found; ++i) {
      if (!at(i, i).is_zero()) {
        u[i] = 1;
        found = true;
      }
    }
    for (std::size_t i = 0; i < N && !found; ++i) {
      for (std::size_t j = i + 1; j < N && !found; ++j) {
        if (!at(i, j).is_zero()) {
          u[i] = 1;
          u[j] = 1;
          found = true;
        }
      }
    }
    if (!found) break;
    std::vector<ExactRational> w(N);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        if (!u[j].is_zero()) w[i] += at(i, j) * u[j];
      }
    }
    ExactRational uGu;
    for (std::size_t i = 0; i < N; ++i) uGu += u[i] * w[i];
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < N; ++j) at(i, j) -= w[i] * w[j] / uGu;
    }
    DiagonalTerm term;
    term.coefficient = uGu / ExactRational(2);
    term.form.resize(N);
    for (std::size_t i = 0; i < N; ++i) term.form[i] = w[i] / uGu;
    out.push_back(std::move(term));
  }
  return out;
}

std::pair<int, int> QuadraticForm::signature() const {
  int pos = 0, neg = 0;
  for (const auto& t : diagonalize()) {
    if (t.coefficient.sign() > 0) ++pos;
    if (t.coefficient.sign() < 0) ++neg;
  }
  return {pos, neg};
}

QuadraticForm QuadraticForm::transform(std::span<const std::int64_t> U) const {
  if (U.size() != gram_.size()) throw PreconditionError("transform: matrix size mismatch");
  IntVec out(gram_.size());
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      BigInt acc = 0;
      for (int k = 0; k < n_; ++k) {
        if (U[static_cast<std::size_t>(k * n_ + i)] == 0) continue;
        for (int l = 0; l < n_; ++l) {
          acc += BigInt(U[static_cast<std::size_t>(k * n_ + i)]) * gram(k, l) * U[static_cast<std::size_t>(l * n_ + j)];
        }
      }
      out[static_cast<std::size_t>(i * n_ + j)] = to_int64(acc);
    }
  }
  QuadraticForm q(n_);
  q.gram_ = std::move(out);
  return q;
}

std::string QuadraticForm::to_string() const {
  std::vector<std::pair<std::int64_t, std::string>> terms;
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      const std::int64_t a = coeff(i, j);
      if (a == 0) continue;
      IntPolynomial::Exponents e(static_cast<std::size_t>(n_), 0);
      ++e[i];
      ++e[j];
      terms.emplace_back(a, monomial_name(e));
    }
  }
  return join_terms(terms);
}

// ---------------------------------------------------------------- IntPolynomial

IntPolynomial IntPolynomial::variable(int n, int i) {
  if (i < 0 || i >= n) throw PreconditionError("variable index out of range");
  IntPolynomial f(n);
  Exponents e(static_cast<std::size_t>(n), 0);
  e[i] = 1;
  f.add_term(e, 1);
  return f;
}

IntPolynomial IntPolynomial::constant(int n, std::int64_t c) {
  IntPolynomial f(n);
  f.add_term(Exponents(static_cast<std::size_t>(n), 0), c);
  return f;
}

void IntPolynomial::add_term(const Exponents& e, std::int64_t c) {
  if (e.size() != static_cast<std::size_t>(n_)) throw ValidationError("monomial has wrong number of exponents");
  for (int x : e) {
    if (x < 0) throw ValidationError("negative exponent");
  }
  if (c == 0) return;
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    it->second = add_checked(it->second, c);
    if (it->second == 0) terms_.erase(it);
  }
}

int IntPolynomial::degree() const noexcept {
  int d = 0;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int x : e) s += x;
    d = std::max(d, s);
  }
  return d;
}

bool IntPolynomial::homogeneous() const noexcept {
  const int d = degree();
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int x : e) s += x;
    if (s != d) return false;
  }
  return true;
}

bool IntPolynomial::depends_on(int i) const noexcept {
  for (const auto& [e, c] : terms_) {
    if (e[i] > 0) return true;
  }
  return false;
}

std::uint64_t IntPolynomial::coefficient_norm() const {
  std::uint64_t total = 0;
  for (const auto& [e, c] : terms_) {
    const std::uint64_t mag = c < 0 ? std::uint64_t(0) - static_cast<std::uint64_t>(c) : static_cast<std::uint64_t>(c);
    if (__builtin_add_overflow(total, mag, &total)) throw ArithmeticOverflow("coefficient norm overflow");
  }
  return total;
}

IntPolynomial IntPolynomial::leading_form() const {
  IntPolynomial out(n_);
  const int d = degree();
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int x : e) s += x;
    if (s == d) out.add_term(e, c);
  }
  return out;
}

bool IntPolynomial::eval_i128(std::span<const std::int64_t> x, i128& out) const noexcept {
  i128 acc = 0;
  for (const auto& [e, c] : terms_) {
    i128 term = c;
    for (int i = 0; i < n_; ++i) {
      for (int k = 0; k < e[i]; ++k) {
        if (__builtin_mul_overflow(term, static_cast<i128>(x[i]), &term)) return false;
      }
    }
    if (__builtin_add_overflow(acc, term, &acc)) return false;
  }
  out = acc;
  return true;
}

BigInt IntPolynomial::eval(std::span<const std::int64_t> x) const {
  if (x.size() != static_cast<std::size_t>(n_)) throw PreconditionError("eval_poly: dimension mismatch");
  i128 fast;
  if (eval_i128(x, fast)) {
    BigInt out = static_cast<std::int64_t>(fast >> 64);
    out <<= 64;
    out += static_cast<std::uint64_t>(fast);
    return out;
  }
  BigInt acc = 0;
  for (const auto& [e, c] : terms_) {
    BigInt term = c;
    for (int i = 0; i < n_; ++i) {
      if (e[i] > 0) term *= boost::multiprecision::pow(BigInt(x[i]), static_cast<unsigned>(e[i]));
    }
    acc += term;
  }
  return acc;
}

std::uint64_t IntPolynomial::eval_mod(std::span<const std::uint64_t> x, std::uint64_t mod) const noexcept {
  if (mod == 1) return 0;
  std::uint64_t acc = 0;
  for (const auto& [e, c] : terms_) {
    std::uint64_t term = reduce_mod(c, mod);
    for (int i = 0; i < n_ && term != 0; ++i) {
      if (e[i] > 0) term = mulmod(term, powmod(x[i], static_cast<std::uint64_t>(e[i]), mod), mod);
    }
    acc += term;
    if (acc >= mod) acc -= mod;
  }
  return acc;
}

long double IntPolynomial::eval_real(std::span<const long double> x) const noexcept {
  long double acc = 0;
  for (const auto& [e, c] : terms_) {
    long double term = static_cast<long double>(c);
    for (int i = 0; i < n_; ++i) {
      for (int k = 0; k < e[i]; ++k) term *= x[i];
    }
    acc += term;
  }
  return acc;
}

IntPolynomial IntPolynomial::derivative(int i) const {
  IntPolynomial out(n_);
  for (const auto& [e, c] : terms_) {
    if (e[i] == 0) continue;
    Exponents d = e;
    --d[i];
    out.add_term(d, mul_checked(c, e[i]));
  }
  return out;
}

IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b) {
  if (a.n_ != b.n_) throw PreconditionError("polynomial dimension mismatch");
  IntPolynomial out = a;
  for (const auto& [e, c] : b.terms_) out.add_term(e, c);
  return out;
}

IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b) {
  if (a.n_ != b.n_) throw PreconditionError("polynomial dimension mismatch");
  IntPolynomial out = a;
  for (const auto& [e, c] : b.terms_) out.add_term(e, mul_checked(c, -1));
  return out;
}

IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b) {
  if (a.n_ != b.n_) throw PreconditionError("polynomial dimension mismatch");
  IntPolynomial out(a.n_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      IntPolynomial::Exponents e(ea.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      out.add_term(e, mul_checked(ca, cb));
    }
  }
  return out;
}

IntPolynomial IntPolynomial::transform(std::span<const std::int64_t> U) const {
  if (U.size() != static_cast<std::size_t>(n_ * n_)) throw PreconditionError("transform: matrix size mismatch");
  std::vector<IntPolynomial> images;
  for (int i = 0; i < n_; ++i) {
    IntPolynomial lin(n_);
    for (int j = 0; j < n_; ++j) {
      Exponents e(static_cast<std::size_t>(n_), 0);
      e[j] = 1;
      lin.add_term(e, U[static_cast<std::size_t>(i * n_ + j)]);
    }
    images.push_back(std::move(lin));
  }
  IntPolynomial out(n_);
  for (const auto& [e, c] : terms_) {
    IntPolynomial term = constant(n_, c);
    for (int i = 0; i < n_; ++i) {
      for (int k = 0; k < e[i]; ++k) term = term * images[i];
    }
    out = out + term;
  }
  return out;
}

std::string IntPolynomial::to_string() const {
  // Highest degree first, then lexicographically largest exponent vector.
  std::vector<std::pair<std::int64_t, std::string>> terms;
  std::vector<std::pair<const Exponents*, std::int64_t>> order;
  for (const auto& [e, c] : terms_) order.emplace_back(&e, c);
  auto deg = [](const Exponents& e) {
    int s = 0;
    for (int x : e) s += x;
    return s;
  };
  std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    const int da = deg(*a.first), db = deg(*b.first);
    if (da != db) return da > db;
    return *a.first > *b.first;
  });
  for (const auto& [e, c] : order) terms.emplace_back(c, monomial_name(*e));
  return join_terms(terms);
}

// ---------------------------------------------------------------- AffineQuadric

bool ValidationReport::ok() const noexcept {
  return std::all_of(items.begin(), items.end(), [](const ValidationItem& i) { return i.pass; });
}

AffineQuadric::AffineQuadric(QuadraticForm form, std::int64_t m) : form_(std::move(form)), m_(m) {
  det2B_ = form_.det2B();
  const auto terms = form_.diagonalize();
  int pos = 0, neg = 0;
  for (const auto& t : terms) (t.coefficient.sign() > 0 ? pos : neg)++;
  signature_ = {pos, neg};
  if (m_ == 0 || det2B_ == 0) return;
  // Two sheets exactly when one axis carries the sign of m.
  const int msign = m_ > 0 ? 1 : -1;
  const DiagonalTerm* minority = nullptr;
  int same = 0;
  for (const auto& t : terms) {
    if (t.coefficient.sign() == msign) {
      ++same;
      minority = &t;
    }
  }
  if (same == 1 && static_cast<int>(terms.size()) == form_.n() && form_.n() >= 2) {
    split_exact_ = minority->form;
    for (const auto& c : split_exact_) split_form_.push_back(static_cast<long double>(c.to_real80()));
  }
}

ValidationReport AffineQuadric::validate() const {
  ValidationReport r;
  r.items.push_back({"m_nonzero", m_ != 0, "m = " + std::to_string(m_)});
  r.items.push_back({"nonsingular", det2B_ != 0, "det2B = " + det2B_.str()});
  r.items.push_back({"indefinite", signature_.first >= 1 && signature_.second >= 1,
                     "signature = (" + std::to_string(signature_.first) + "," + std::to_string(signature_.second) + ")"});
  if (n() == 3) {
    const ExactRational t = ternary_discriminant(*this);
    const bool square = is_rational_square(t);
    r.items.push_back({"ternary_nonsquare", !square,
                       "-m*det2B/8 = " + t.to_string() + (square ? " is a rational square" : " is not a rational square")});
  } else {
    r.items.push_back({"ternary_nonsquare", true, "not applicable (n = " + std::to_string(n()) + ")"});
  }
  return r;
}

void AffineQuadric::require_valid() const {
  const ValidationReport r = validate();
  if (r.ok()) return;
  std::string msg = "quadric fails validation:";
  for (const auto& item : r.items) {
    if (!item.pass) msg += " " + item.name + " (" + item.detail + ")";
  }
  throw ValidationError(msg);
}

int AffineQuadric::component_of(std::span<const long double> x) const noexcept {
  if (split_form_.empty()) return 0;
  long double s = 0;
  for (std::size_t i = 0; i < split_form_.size(); ++i) s += split_form_[i] * x[i];
  return s > 0 ? 1 : 0;
}

int AffineQuadric::component_of(std::span<const std::int64_t> x) const noexcept {
  if (split_exact_.empty()) return 0;
  ExactRational s;
  for (std::size_t i = 0; i < split_exact_.size(); ++i) {
    if (x[i] != 0) s += split_exact_[i] * ExactRational(x[i]);
  }
  return s.sign() > 0 ? 1 : 0;
}

bool AffineQuadric::contains(std::span<const std::int64_t> x) const { return form_.eval(x) == m_; }

ExactRational ternary_discriminant(const AffineQuadric& Y) {
  return ExactRational(-BigInt(Y.m()) * Y.det2B(), BigInt(8));
}

bool is_rational_square(const ExactRational& q) {
  if (q.sign() < 0) return false;
  return is_square(q.numerator()) && is_square(q.denominator());
}

// ---------------------------------------------------------------- QuadraticPolynomial

QuadraticPolynomial QuadraticPolynomial::from_polynomial(const IntPolynomial& f) {
  if (f.degree() > 2) throw PreconditionError("quadratic polynomial expected (degree <= 2)");
  const int n = f.n();
  QuadraticPolynomial q;
  std::vector<std::tuple<int, int, std::int64_t>> quad;
  q.linear.assign(static_cast<std::size_t>(n), 0);
  for (const auto& [e, c] : f.terms()) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < e[i]; ++k) idx.push_back(i);
    }
    if (idx.size() == 2) quad.emplace_back(idx[0], idx[1], c);
    else if (idx.size() == 1) q.linear[idx[0]] = c;
    else q.constant = c;
  }
  q.quad = QuadraticForm::from_coefficients(n, quad);
  return q;
}

QuadraticPolynomial QuadraticPolynomial::from_quadric(const AffineQuadric& Y) {
  QuadraticPolynomial q;
  q.quad = Y.form();
  q.linear.assign(static_cast<std::size_t>(Y.n()), 0);
  q.constant = -Y.m();
  return q;
}

IntPolynomial QuadraticPolynomial::to_polynomial() const {
  const int n = quad.n();
  IntPolynomial f(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      IntPolynomial::Exponents e(static_cast<std::size_t>(n), 0);
      ++e[i];
      ++e[j];
      f.add_term(e, quad.coeff(i, j));
    }
    IntPolynomial::Exponents e(static_cast<std::size_t>(n), 0);
    e[i] = 1;
    f.add_term(e, linear[i]);
  }
  f.add_term(IntPolynomial::Exponents(static_cast<std::size_t>(n), 0), constant);
  return f;
}

BigInt QuadraticPolynomial::eval(std::span<const std::int64_t> x) const {
  BigInt v = quad.eval(x) + constant;
  for (int i = 0; i < n(); ++i) v += BigInt(linear[i]) * x[i];
  return v;
}

Homogenization homogenize(const QuadraticPolynomial& q) {
  const int nu = q.n();
  QuadraticForm R(nu + 1);
  std::vector<std::tuple<int, int, std::int64_t>> terms;
  std::vector<std::tuple<int, int, std::int64_t>> q0_terms;
  for (int i = 0; i < nu; ++i) {
    for (int j = i; j < nu; ++j) {
      const std::int64_t a = q.quad.coeff(i, j);
      if (a == 0) continue;
      terms.emplace_back(i + 1, j + 1, a);
      q0_terms.emplace_back(i, j, a);
    }
    if (q.linear[i] != 0) terms.emplace_back(0, i + 1, q.linear[i]);
  }
  if (q.constant != 0) terms.emplace_back(0, 0, q.constant);
  return {QuadraticForm::from_coefficients(nu + 1, terms), QuadraticForm::from_coefficients(nu, q0_terms)};
}

Homogenization homogenize(const IntPolynomial& q) { return homogenize(QuadraticPolynomial::from_polynomial(q)); }

// ---------------------------------------------------------------- nonsingularity mod p

NonsingularityCheck is_nonsingular_form_mod_p(const IntPolynomial& f, std::uint64_t p) {
  if (!f.homogeneous()) throw PreconditionError("is_nonsingular_form_mod_p: f must be homogeneous");
  if (!is_prime(p)) throw PreconditionError("is_nonsingular_form_mod_p: p must be prime");
  const int n = f.n();
  std::vector<IntPolynomial> grad;
  for (int i = 0; i < n; ++i) grad.push_back(f.derivative(i));

  auto singular_at = [&](const std::vector<std::uint64_t>& x) {
    for (const auto& g : grad) {
      if (g.eval_mod(x, p) != 0) return false;
    }
    return true;
  };

  constexpr long double kExhaustiveLimit = 2e6L;
  long double projective = 0;
  for (int k = 0; k < n; ++k) projective += powl(static_cast<long double>(p), k);

  NonsingularityCheck out;
  std::vector<std::uint64_t> x(static_cast<std::size_t>(n), 0);
  if (projective <= kExhaustiveLimit) {
    // Representatives with first nonzero coordinate equal to 1.
    for (int lead = 0; lead < n; ++lead) {
      std::fill(x.begin(), x.end(), 0);
      x[lead] = 1;
      for (;;) {
        if (singular_at(x)) {
          out.nonsingular = false;
          return out;
        }
        int k = n - 1;
        while (k > lead && ++x[k] == p) x[k--] = 0;
        if (k == lead) break;
      }
    }
    return out;
  }
  out.exact = false;
  std::mt19937_64 rng(p);
  std::uniform_int_distribution<std::uint64_t> digit(0, p - 1);
  for (int trial = 0; trial < 100000; ++trial) {
    bool nonzero = false;
    for (auto& xi : x) {
      xi = digit(rng);
      nonzero |= xi != 0;
    }
    if (nonzero && singular_at(x)) {
      out.nonsingular = false;
      out.exact = true;
      return out;
    }
  }
  return out;
}

}  // namespace powerfree
