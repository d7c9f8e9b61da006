#include "powerfree/localdens.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>

#include "powerfree/errors.hpp"

namespace powerfree {
namespace {

using u64 = std::uint64_t;

constexpr u64 kModulusLimit = u64{1} << 62;
constexpr std::size_t kLiftChunk = 4096;

u64 inverse_mod(u64 a, u64 p) { return powmod(a % p, p - 2, p); }

std::optional<u64> try_pow(u64 p, int e) {
  u64 out = 1;
  for (int i = 0; i < e; ++i) {
    if (__builtin_mul_overflow(out, p, &out) || out > kModulusLimit) return std::nullopt;
  }
  return out;
}

BigInt big_pow(u64 p, int e) { return boost::multiprecision::pow(BigInt(p), static_cast<unsigned>(e)); }

// #{y in F_p^k : sum d_i y_i^2 = m} for nonzero d_i and odd p.
BigInt diagonal_count(const std::vector<u64>& d, u64 m, u64 p) {
  const int k = static_cast<int>(d.size());
  if (k == 0) return m == 0 ? 1 : 0;
  u64 D = 1;
  for (u64 v : d) D = mulmod(D, v, p);
  const BigInt lead = big_pow(p, k - 1);
  if (k % 2 == 0) {
    const u64 sign = (k / 2) % 2 == 0 ? 1 : p - 1;
    const int eta = legendre(mulmod(sign, D, p), p);
    const BigInt half = big_pow(p, (k - 2) / 2);
    if (m == 0) return lead + BigInt(p - 1) * half * eta;
    return lead - half * eta;
  }
  if (m == 0) return lead;
  const u64 sign = ((k - 1) / 2) % 2 == 0 ? 1 : p - 1;
  const int eta = legendre(mulmod(mulmod(sign, m, p), D, p), p);
  return lead + big_pow(p, (k - 1) / 2) * eta;
}

// Nonzero diagonal entries of a congruence diagonalization of the symmetric
// matrix A over F_p, p odd.
std::vector<u64> congruence_diagonal(std::vector<u64> A, int n, u64 p) {
  auto at = [&](int i, int j) -> u64& { return A[static_cast<std::size_t>(i * n + j)]; };
  std::vector<u64> d;
  for (int i = 0; i < n; ++i) {
    if (at(i, i) == 0) {
      int j = i + 1;
      while (j < n && at(j, j) == 0) ++j;
      if (j < n) {
        for (int t = 0; t < n; ++t) std::swap(at(i, t), at(j, t));
        for (int t = 0; t < n; ++t) std::swap(at(t, i), at(t, j));
      } else {
        int k = i + 1;
        while (k < n && at(i, k) == 0) ++k;
        if (k == n) continue;
        // x_i -> x_i + x_k makes the diagonal entry 2 a_ik.
        for (int t = 0; t < n; ++t) at(i, t) = (at(i, t) + at(k, t)) % p;
        for (int t = 0; t < n; ++t) at(t, i) = (at(t, i) + at(t, k)) % p;
      }
    }
    const u64 inv = inverse_mod(at(i, i), p);
    for (int k = i + 1; k < n; ++k) {
      const u64 factor = mulmod(at(k, i), inv, p);
      if (factor == 0) continue;
      for (int t = 0; t < n; ++t) at(k, t) = (at(k, t) + p - mulmod(factor, at(i, t), p)) % p;
      for (int t = 0; t < n; ++t) at(t, k) = (at(t, k) + p - mulmod(factor, at(t, i), p)) % p;
    }
    d.push_back(at(i, i));
  }
  return d;
}

// #{x in F_p^n : x^T G x / 2 = m} for a doubled Gram matrix G given mod p.
BigInt count_form_solutions(const std::vector<u64>& G, int n, u64 m, u64 p) {
  if (p == 2) throw PreconditionError("count_form_solutions: p must be odd");
  const u64 half = inverse_mod(2, p);
  std::vector<u64> A(G.size());
  for (std::size_t i = 0; i < G.size(); ++i) A[i] = mulmod(G[i], half, p);
  const std::vector<u64> d = congruence_diagonal(std::move(A), n, p);
  return diagonal_count(d, m % p, p) * big_pow(p, n - static_cast<int>(d.size()));
}

struct Constraints {
  const IntPolynomial* f = nullptr;  // f = 0 mod p^min(level, f_cap)
  int f_cap = std::numeric_limits<int>::max();
  std::vector<std::int64_t> c;       // c . x = 0 mod p^level
  std::vector<std::int64_t> xi;      // x = xi mod p^xi_level
  int xi_level = 0;
};

// Residue classes mod p^k on Y, flattened n coordinates at a time.
class Lifter {
 public:
  Lifter(const AffineQuadric& Y, u64 p, Constraints cons) : Y_(Y), p_(p), n_(Y.n()), cons_(std::move(cons)) {
    if (cons_.f != nullptr) {
      for (int i = 0; i < n_; ++i) df_.push_back(cons_.f->derivative(i));
    }
  }

  int n() const noexcept { return n_; }
  u64 p() const noexcept { return p_; }

  // Q(x) - m mod M.
  u64 quadric_mod(const u64* x, u64 M) const {
    const auto& Q = Y_.form();
    u64 acc = 0;
    for (int i = 0; i < n_; ++i) {
      if (x[i] == 0) continue;
      u64 row = 0;
      for (int j = i; j < n_; ++j) {
        const std::int64_t a = Q.coeff(i, j);
        if (a == 0 || x[j] == 0) continue;
        row = (row + mulmod(reduce_mod(a, M), x[j] % M, M)) % M;
      }
      acc = (acc + mulmod(row, x[i] % M, M)) % M;
    }
    return (acc + M - reduce_mod(Y_.m(), M)) % M;
  }

  // min_i v_p((2B x)_i), capped at k, for x mod p^k.
  int gradient_valuation(const u64* x, u64 pk, int k) const {
    int v = k;
    for (int i = 0; i < n_ && v > 0; ++i) {
      u64 g = 0;
      for (int j = 0; j < n_; ++j) {
        const std::int64_t a = Y_.form().gram(i, j);
        if (a != 0) g = (g + mulmod(reduce_mod(a, pk), x[j], pk)) % pk;
      }
      int w = 0;
      while (w < v && g % p_ == 0) {
        g /= p_;
        ++w;
      }
      v = std::min(v, w);
    }
    return v;
  }

  bool satisfies_level_one(const u64* y) const {
    if (quadric_mod(y, p_) != 0) return false;
    const std::span<const u64> ys(y, static_cast<std::size_t>(n_));
    if (cons_.f != nullptr && cons_.f_cap >= 1 && cons_.f->eval_mod(ys, p_) != 0) return false;
    if (!cons_.c.empty()) {
      u64 s = 0;
      for (int i = 0; i < n_; ++i) s = (s + mulmod(reduce_mod(cons_.c[i], p_), y[i], p_)) % p_;
      if (s != 0) return false;
    }
    return true;
  }

  // Classes mod p satisfying every constraint.
  std::vector<u64> roots(const ParallelContext& ctx) const {
    std::vector<u64> out;
    const auto N = static_cast<std::size_t>(n_);
    if (cons_.xi_level >= 1) {
      std::vector<u64> y(N);
      for (int i = 0; i < n_; ++i) y[i] = reduce_mod(cons_.xi[i], p_);
      if (satisfies_level_one(y.data())) out = y;
      return out;
    }
    const long double cells = powl(static_cast<long double>(p_), n_ - 1);
    ctx.require_budget(cells, "enumeration of points mod p");
    if (n_ == 1 || p_ == 2 || cells * p_ <= (1 << 18)) {
      std::vector<u64> y(N, 0);
      for (;;) {
        if (satisfies_level_one(y.data())) out.insert(out.end(), y.begin(), y.end());
        int k = n_ - 1;
        while (k >= 0 && y[k] == p_ - 1) y[k--] = 0;
        if (k < 0) break;
        ++y[k];
      }
      return out;
    }
    if (p_ >= (u64{1} << 26)) throw BudgetExceeded("enumeration of points mod p: p too large");
    // Solve for the last coordinate on each fiber, chunked over the first.
    std::vector<std::uint32_t> sqrt_table(p_, std::numeric_limits<std::uint32_t>::max());
    for (u64 t = 0; t <= p_ / 2; ++t) sqrt_table[mulmod(t, t, p_)] = static_cast<std::uint32_t>(t);
    const std::size_t chunks = std::min<std::size_t>(p_, 64);
    auto parts = ctx.map<std::vector<u64>>(chunks, [&](std::size_t chunk) {
      std::vector<u64> part;
      std::vector<u64> y(N, 0);
      const u64 lo = p_ * chunk / chunks, hi = p_ * (chunk + 1) / chunks;
      const int last = n_ - 1;
      const u64 a = reduce_mod(Y_.form().coeff(last, last), p_);
      const u64 two_a_inv = a == 0 ? 0 : inverse_mod(mulmod(2, a, p_), p_);
      for (u64 first = lo; first < hi; ++first) {
        ctx.poll();
        std::fill(y.begin(), y.end(), 0);
        y[0] = first;
        for (;;) {
          y[last] = 0;
          u64 b = 0;
          for (int i = 0; i < last; ++i) b = (b + mulmod(reduce_mod(Y_.form().coeff(i, last), p_), y[i], p_)) % p_;
          const u64 c = quadric_mod(y.data(), p_);
          auto emit = [&](u64 t) {
            y[last] = t;
            if (satisfies_level_one(y.data())) part.insert(part.end(), y.begin(), y.end());
          };
          if (a != 0) {
            const u64 disc = (mulmod(b, b, p_) + p_ - mulmod(4 % p_, mulmod(a, c, p_), p_)) % p_;
            const std::uint32_t s = sqrt_table[disc];
            if (s != std::numeric_limits<std::uint32_t>::max()) {
              const u64 r1 = mulmod((p_ - b + s) % p_, two_a_inv, p_);
              const u64 r2 = mulmod((2 * p_ - b - s) % p_, two_a_inv, p_);
              emit(std::min(r1, r2));
              if (r1 != r2) emit(std::max(r1, r2));
            }
          } else if (b != 0) {
            emit(mulmod(p_ - c == p_ ? 0 : p_ - c, inverse_mod(b, p_), p_));
          } else if (c == 0) {
            for (u64 t = 0; t < p_; ++t) emit(t);
          }
          int k = last - 1;
          while (k >= 1 && y[k] == p_ - 1) y[k--] = 0;
          if (k < 1) break;
          ++y[k];
        }
      }
      return part;
    });
    for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
    return out;
  }

  // Lifts of a class x mod p^j (satisfying the constraints mod p^j, j >= 1)
  // to classes mod p^(j+1). The conditions are affine in the new digit.
  void lift(const u64* x, int j, u64 pj, std::vector<u64>& out) const {
    const u64 next = pj * p_;
    const auto N = static_cast<std::size_t>(n_);
    std::vector<std::vector<u64>> rows;
    auto add_row = [&](std::vector<u64> row) { rows.push_back(std::move(row)); };

    {
      std::vector<u64> row(N + 1);
      for (int i = 0; i < n_; ++i) {
        u64 g = 0;
        for (int k = 0; k < n_; ++k) g = (g + mulmod(reduce_mod(Y_.form().gram(i, k), p_), x[k] % p_, p_)) % p_;
        row[i] = g;
      }
      row[N] = (p_ - (quadric_mod(x, next) / pj) % p_) % p_;
      add_row(std::move(row));
    }
    if (cons_.f != nullptr && j + 1 <= cons_.f_cap) {
      std::vector<u64> xr(N);
      for (int i = 0; i < n_; ++i) xr[i] = x[i] % p_;
      std::vector<u64> row(N + 1);
      for (int i = 0; i < n_; ++i) row[i] = df_[i].eval_mod(xr, p_);
      const std::span<const u64> xs(x, N);
      row[N] = (p_ - (cons_.f->eval_mod(xs, next) / pj) % p_) % p_;
      add_row(std::move(row));
    }
    if (!cons_.c.empty()) {
      std::vector<u64> row(N + 1);
      u64 s = 0;
      for (int i = 0; i < n_; ++i) {
        row[i] = reduce_mod(cons_.c[i], p_);
        s = (s + mulmod(reduce_mod(cons_.c[i], next), x[i], next)) % next;
      }
      row[N] = (p_ - (s / pj) % p_) % p_;
      add_row(std::move(row));
    }
    if (j < cons_.xi_level) {
      for (int i = 0; i < n_; ++i) {
        std::vector<u64> row(N + 1, 0);
        row[i] = 1;
        row[N] = (reduce_mod(cons_.xi[i], next) / pj) % p_;
        add_row(std::move(row));
      }
    }
    solve_and_emit(rows, x, pj, out);
  }

 private:
  // Appends x + pj*y for every y in F_p^n with rows . (y, -1) = 0.
  void solve_and_emit(std::vector<std::vector<u64>>& rows, const u64* x, u64 pj, std::vector<u64>& out) const {
    const int n = n_;
    std::vector<int> pivot_col;
    std::size_t rank = 0;
    for (int col = 0; col < n && rank < rows.size(); ++col) {
      std::size_t piv = rank;
      while (piv < rows.size() && rows[piv][col] == 0) ++piv;
      if (piv == rows.size()) continue;
      std::swap(rows[rank], rows[piv]);
      const u64 inv = inverse_mod(rows[rank][col], p_);
      for (auto& v : rows[rank]) v = mulmod(v, inv, p_);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r == rank || rows[r][col] == 0) continue;
        const u64 factor = rows[r][col];
        for (int t = 0; t <= n; ++t) rows[r][t] = (rows[r][t] + p_ - mulmod(factor, rows[rank][t], p_)) % p_;
      }
      pivot_col.push_back(col);
      ++rank;
    }
    for (std::size_t r = rank; r < rows.size(); ++r) {
      if (rows[r][n] != 0) return;
    }
    std::vector<int> free_cols;
    for (int col = 0, k = 0; col < n; ++col) {
      if (k < static_cast<int>(pivot_col.size()) && pivot_col[k] == col) {
        ++k;
      } else {
        free_cols.push_back(col);
      }
    }
    std::vector<u64> y(static_cast<std::size_t>(n), 0);
    for (;;) {
      for (std::size_t r = 0; r < rank; ++r) {
        u64 v = rows[r][n];
        for (int col : free_cols) v = (v + p_ - mulmod(rows[r][col], y[col], p_)) % p_;
        y[pivot_col[r]] = v;
      }
      for (int i = 0; i < n; ++i) out.push_back(x[i] + pj * y[i]);
      int k = static_cast<int>(free_cols.size()) - 1;
      while (k >= 0 && y[free_cols[k]] == p_ - 1) y[free_cols[k--]] = 0;
      if (k < 0) break;
      ++y[free_cols[k]];
    }
  }

  const AffineQuadric& Y_;
  u64 p_;
  int n_;
  Constraints cons_;
  std::vector<IntPolynomial> df_;
};

// Lifts every class; chunks are merged in order so the result is independent
// of the worker count.
std::vector<u64> lift_all(const Lifter& L, const std::vector<u64>& nodes, int j, u64 pj, const ParallelContext& ctx) {
  const auto N = static_cast<std::size_t>(L.n());
  const std::size_t count = nodes.size() / N;
  const std::size_t chunks = (count + kLiftChunk - 1) / kLiftChunk;
  auto parts = ctx.map<std::vector<u64>>(chunks, [&](std::size_t c) {
    ctx.poll();
    std::vector<u64> part;
    const std::size_t hi = std::min(count, (c + 1) * kLiftChunk);
    for (std::size_t i = c * kLiftChunk; i < hi; ++i) L.lift(nodes.data() + i * N, j, pj, part);
    return part;
  });
  std::vector<u64> out;
  for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
  return out;
}

// Number of classes mod p^e satisfying the constraints.
BigInt lifted_count(const AffineQuadric& Y, u64 p, int e, Constraints cons, const ParallelContext& ctx) {
  if (e == 0) return 1;
  if (!try_pow(p, e)) throw ArithmeticOverflow("lifted count: p^e beyond 2^62");
  const Lifter L(Y, p, std::move(cons));
  const auto N = static_cast<std::size_t>(Y.n());
  std::vector<u64> nodes = L.roots(ctx);
  long double work = static_cast<long double>(nodes.size() / N);
  u64 pj = p;
  for (int j = 1; j < e; ++j) {
    nodes = lift_all(L, nodes, j, pj, ctx);
    pj *= p;
    work += static_cast<long double>(nodes.size() / N);
    ctx.require_budget(work, "lifting residue classes");
  }
  return BigInt(nodes.size() / N);
}

enum class FMode { none, not_divisible, divisible };

LocalDensityValue density_tree(const AffineQuadric& Y, u64 p, const IntPolynomial* f, FMode mode, int r,
                               std::span<const std::int64_t> xi, int mu, const ParallelContext& ctx) {
  Constraints cons;
  if (mode == FMode::divisible) {
    cons.f = f;
    cons.f_cap = r;
  }
  if (mu > 0) {
    cons.xi.assign(xi.begin(), xi.end());
    cons.xi_level = mu;
  }
  const Lifter L(Y, p, std::move(cons));
  const int n = Y.n();
  const auto N = static_cast<std::size_t>(n);

  std::map<int, BigInt> resolved;  // exponent e -> number of classes of measure p^e
  auto total = [&](const std::map<int, BigInt>& parts) {
    ExactRational sum;
    for (const auto& [e, count] : parts) sum += ExactRational(count) * ExactRational::power(p, e);
    return sum;
  };

  LocalDensityValue out;
  out.p = p;
  std::vector<u64> nodes = L.roots(ctx);
  long double work = 0;
  int k = 1;
  u64 pk = p;
  for (;;) {
    const std::size_t count = nodes.size() / N;
    if (count == 0) break;
    work += static_cast<long double>(count);
    const bool can_refine = try_pow(p, k + 1).has_value();
    std::vector<u64> pending;
    bool out_of_range = false;
    for (std::size_t i = 0; i < count; ++i) {
      const u64* x = nodes.data() + i * N;
      const int v = L.gradient_valuation(x, pk, k);
      bool f_known = true;
      u64 f_residue = 1;
      if (mode == FMode::not_divisible) {
        const std::span<const u64> xs(x, N);
        f_residue = f->eval_mod(xs, std::min<u64>(pk, *try_pow(p, std::min(k, r))));
        f_known = k >= r || f_residue != 0;
      } else if (mode == FMode::divisible) {
        f_known = k >= r;
      }
      if (v < k && k >= mu && f_known) {
        const auto M = try_pow(p, k + v);
        if (!M) {
          out_of_range = true;
          pending.insert(pending.end(), x, x + N);
          continue;
        }
        if (L.quadric_mod(x, *M) != 0) continue;
        if (mode == FMode::not_divisible && f_residue == 0) continue;
        resolved[v - k * (n - 1)] += 1;
        continue;
      }
      pending.insert(pending.end(), x, x + N);
    }
    if (pending.empty()) {
      nodes.clear();
      break;
    }
    if (out_of_range || !can_refine || work > static_cast<long double>(ctx.budget())) {
      // Unresolved classes remain: report a bracket.
      out.status = DensityStatus::capped;
      out.heuristic = true;
      out.level = k;
      out.value = total(resolved);
      out.lower = out.value;
      std::map<int, BigInt> guess = resolved;
      guess[(k - 1) - k * (n - 1)] += BigInt(pending.size() / N);
      out.upper = total(guess);
      return out;
    }
    nodes = lift_all(L, pending, k, pk, ctx);
    ++k;
    pk *= p;
  }
  out.status = DensityStatus::stabilized;
  out.level = k;
  out.value = total(resolved);
  out.lower = out.upper = out.value;
  return out;
}

LocalDensityValue closed_form(u64 p, ExactRational value) {
  LocalDensityValue out;
  out.p = p;
  out.value = value;
  out.lower = out.upper = out.value;
  out.level = 1;
  out.status = DensityStatus::hensel_shortcut;
  return out;
}

bool quadric_good(const AffineQuadric& Y, u64 p) {
  return p != 2 && Y.m() % static_cast<std::int64_t>(p) != 0 && Y.det2B() % p != 0;
}

std::vector<u64> gram_mod(const QuadraticForm& Q, u64 p) {
  std::vector<u64> G(Q.doubled_gram().size());
  for (std::size_t i = 0; i < G.size(); ++i) G[i] = reduce_mod(Q.doubled_gram()[i], p);
  return G;
}

// Y and {f = 0} meet transversally at every F_p point.
bool transversal_mod_p(const AffineQuadric& Y, const IntPolynomial& f, u64 p) {
  Constraints cons;
  cons.f = &f;
  const Lifter L(Y, p, cons);
  const int n = Y.n();
  const auto N = static_cast<std::size_t>(n);
  std::vector<IntPolynomial> df;
  for (int i = 0; i < n; ++i) df.push_back(f.derivative(i));
  const std::vector<u64> pts = L.roots(ParallelContext());
  std::vector<u64> g(N), h(N);
  for (std::size_t k = 0; k < pts.size() / N; ++k) {
    const std::span<const u64> x(pts.data() + k * N, N);
    for (int i = 0; i < n; ++i) {
      u64 s = 0;
      for (int j = 0; j < n; ++j) s = (s + mulmod(reduce_mod(Y.form().gram(i, j), p), x[j], p)) % p;
      g[i] = s;
      h[i] = df[i].eval_mod(x, p);
    }
    bool independent = false;
    for (int i = 0; i < n && !independent; ++i) {
      for (int j = i + 1; j < n && !independent; ++j) {
        independent = mulmod(g[i], h[j], p) != mulmod(g[j], h[i], p);
      }
    }
    if (!independent) return false;
  }
  return true;
}

// rho(p) at a good prime.
BigInt rho_mod_p(const AffineQuadric& Y, const IntPolynomial& f, u64 p, const ParallelContext& ctx) {
  const int n = Y.n();
  if (f.degree() == 1 && f.homogeneous() && p != 2 && n >= 2) {
    // Eliminate x_j through f = 0 and count on the remaining n - 1 variables.
    std::vector<u64> c(static_cast<std::size_t>(n), 0);
    for (const auto& [e, coef] : f.terms()) {
      for (int i = 0; i < n; ++i) {
        if (e[i] == 1) c[i] = reduce_mod(coef, p);
      }
    }
    int j = n - 1;
    while (j >= 0 && c[j] == 0) --j;
    if (j >= 0) {
      const u64 inv = inverse_mod(c[j], p);
      // x = L y with L an n x (n-1) matrix.
      std::vector<u64> Lm(static_cast<std::size_t>(n * (n - 1)), 0);
      for (int i = 0, col = 0; i < n; ++i) {
        if (i == j) continue;
        Lm[static_cast<std::size_t>(i * (n - 1) + col)] = 1;
        Lm[static_cast<std::size_t>(j * (n - 1) + col)] = mulmod(p - c[i] == p ? 0 : p - c[i], inv, p);
        ++col;
      }
      const std::vector<u64> G = gram_mod(Y.form(), p);
      const int m1 = n - 1;
      std::vector<u64> GL(static_cast<std::size_t>(n * m1), 0), H(static_cast<std::size_t>(m1 * m1), 0);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < m1; ++b) {
          u64 s = 0;
          for (int k = 0; k < n; ++k) s = (s + mulmod(G[static_cast<std::size_t>(a * n + k)], Lm[static_cast<std::size_t>(k * m1 + b)], p)) % p;
          GL[static_cast<std::size_t>(a * m1 + b)] = s;
        }
      }
      for (int a = 0; a < m1; ++a) {
        for (int b = 0; b < m1; ++b) {
          u64 s = 0;
          for (int k = 0; k < n; ++k) s = (s + mulmod(Lm[static_cast<std::size_t>(k * m1 + a)], GL[static_cast<std::size_t>(k * m1 + b)], p)) % p;
          H[static_cast<std::size_t>(a * m1 + b)] = s;
        }
      }
      return count_form_solutions(H, m1, reduce_mod(Y.m(), p), p);
    }
  }
  Constraints cons;
  cons.f = &f;
  return lifted_count(Y, p, 1, cons, ctx);
}

void require_prime(u64 p, const char* what) {
  if (!is_prime(p)) throw PreconditionError(std::string(what) + ": p must be prime");
}

}  // namespace

std::string to_string(DensityStatus s) {
  switch (s) {
    case DensityStatus::stabilized: return "stabilized";
    case DensityStatus::capped: return "capped";
    case DensityStatus::hensel_shortcut: return "hensel-shortcut";
  }
  return "?";
}

std::string to_string(Solubility s) {
  switch (s) {
    case Solubility::soluble: return "soluble";
    case Solubility::insoluble: return "insoluble";
    case Solubility::unknown: return "unknown";
  }
  return "?";
}

PrimeClass classify_prime(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t p) {
  require_prime(p, "classify_prime");
  PrimeClass pc;
  pc.p = p;
  const int d = f.is_zero() ? 0 : f.degree();
  pc.divides_2 = p == 2;
  pc.divides_degree = d == 0 || static_cast<u64>(d) % p == 0;
  pc.divides_m = Y.m() % static_cast<std::int64_t>(p) == 0;
  pc.divides_det = Y.det2B() % p == 0;
  std::vector<std::string> why;
  if (pc.divides_2) why.emplace_back("p | 2");
  if (pc.divides_degree) why.emplace_back("p | deg f");
  if (pc.divides_m) why.emplace_back("p | m");
  if (pc.divides_det) why.emplace_back("p | det(2B)");
  if (why.empty()) {
    if (d == 0) {
      pc.f_singular = true;
    } else if (f.homogeneous() && d == 1) {
      bool all_zero = true;
      for (const auto& [e, c] : f.terms()) all_zero &= reduce_mod(c, p) == 0;
      pc.f_singular = all_zero;
    } else if (f.homogeneous() && d == 2) {
      pc.f_singular = QuadraticPolynomial::from_polynomial(f).quad.rank_mod(p) < f.n();
    } else if (f.homogeneous()) {
      const NonsingularityCheck check = is_nonsingular_form_mod_p(f, p);
      pc.f_singular = !check.nonsingular;
      if (check.exact == false) pc.f_singular = !transversal_mod_p(Y, f, p);
    } else {
      pc.f_singular = !transversal_mod_p(Y, f, p);
    }
    if (pc.f_singular) why.emplace_back("f singular mod p");
  }
  pc.good = why.empty();
  if (pc.good) {
    pc.reason = "good";
  } else {
    for (std::size_t i = 0; i < why.size(); ++i) pc.reason += (i ? ", " : "") + why[i];
  }
  return pc;
}

BigInt count_points_mod_p(const AffineQuadric& Y, std::uint64_t p) {
  require_prime(p, "count_points_mod_p");
  if (p == 2) return lifted_count(Y, p, 1, {}, ParallelContext());
  return count_form_solutions(gram_mod(Y.form(), p), Y.n(), reduce_mod(Y.m(), p), p);
}

BigInt count_points_mod_prime_power(const AffineQuadric& Y, std::uint64_t p, int e, const ParallelContext& ctx) {
  require_prime(p, "count_points_mod_prime_power");
  return lifted_count(Y, p, e, {}, ctx);
}

BigInt rho_prime_power(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t p, int e,
                       const ParallelContext& ctx, bool exhaustive) {
  require_prime(p, "rho_prime_power");
  if (e < 0) throw PreconditionError("rho_prime_power: e must be >= 0");
  if (e == 0) return 1;
  if (!exhaustive && classify_prime(Y, f, p).good) {
    return big_pow(p, (e - 1) * (Y.n() - 2)) * rho_mod_p(Y, f, p, ctx);
  }
  Constraints cons;
  cons.f = &f;
  return lifted_count(Y, p, e, cons, ctx);
}

BigInt rho(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t ell, const ParallelContext& ctx) {
  if (ell == 0) throw PreconditionError("rho: l must be positive");
  BigInt out = 1;
  for (const auto& pp : factorize(ell).factors) out *= rho_prime_power(Y, f, pp.prime, pp.exponent, ctx);
  return out;
}

BigInt rho_linear_constraint(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t ell,
                             std::span<const std::int64_t> c, const ParallelContext& ctx) {
  if (ell == 0) throw PreconditionError("rho_linear_constraint: l must be positive");
  if (static_cast<int>(c.size()) != Y.n()) throw PreconditionError("rho_linear_constraint: c has the wrong length");
  BigInt out = 1;
  for (const auto& pp : factorize(ell).factors) {
    Constraints cons;
    cons.f = &f;
    cons.c.assign(c.begin(), c.end());
    out *= lifted_count(Y, pp.prime, pp.exponent, std::move(cons), ctx);
  }
  return out;
}

LocalDensityValue padic_point_density(const AffineQuadric& Y, std::uint64_t p, const ParallelContext& ctx,
                                      bool exhaustive) {
  require_prime(p, "padic_point_density");
  if (!exhaustive && quadric_good(Y, p)) {
    return closed_form(p, ExactRational(count_points_mod_p(Y, p)) * ExactRational::power(p, -(Y.n() - 1)));
  }
  return density_tree(Y, p, nullptr, FMode::none, 0, {}, 0, ctx);
}

LocalDensityValue padic_density_f(const AffineQuadric& Y, const IntPolynomial& f, int r, std::uint64_t p,
                                  const ParallelContext& ctx, bool exhaustive) {
  require_prime(p, "padic_density_f");
  if (r < 1) throw PreconditionError("padic_density_f: r must be positive");
  const int n = Y.n();
  if (!exhaustive && classify_prime(Y, f, p).good) {
    const BigInt points = big_pow(p, (r - 1) * (n - 1)) * count_points_mod_p(Y, p);
    const BigInt rho_pr = rho_prime_power(Y, f, p, r, ctx);
    return closed_form(p, ExactRational(BigInt(points - rho_pr)) * ExactRational::power(p, -r * (n - 1)));
  }
  return density_tree(Y, p, &f, FMode::not_divisible, r, {}, 0, ctx);
}

LocalDensityValue padic_density_divisible(const AffineQuadric& Y, const IntPolynomial& f, int r, std::uint64_t p,
                                          const ParallelContext& ctx, bool exhaustive) {
  require_prime(p, "padic_density_divisible");
  if (r < 1) throw PreconditionError("padic_density_divisible: r must be positive");
  if (!exhaustive && classify_prime(Y, f, p).good) {
    return closed_form(p, ExactRational(rho_prime_power(Y, f, p, r, ctx)) * ExactRational::power(p, -r * (Y.n() - 1)));
  }
  return density_tree(Y, p, &f, FMode::divisible, r, {}, 0, ctx);
}

LocalDensityValue padic_density_xi(const AffineQuadric& Y, std::span<const std::int64_t> xi, std::uint64_t ell,
                                   std::uint64_t p, const ParallelContext& ctx, bool exhaustive) {
  require_prime(p, "padic_density_xi");
  if (ell == 0) throw PreconditionError("padic_density_xi: l must be positive");
  if (static_cast<int>(xi.size()) != Y.n()) throw PreconditionError("padic_density_xi: xi has the wrong length");
  const int mu = valuation(static_cast<std::int64_t>(ell), p);
  if (mu == 0) return padic_point_density(Y, p, ctx, exhaustive);
  const auto pmu = try_pow(p, mu);
  if (!pmu) throw ArithmeticOverflow("padic_density_xi: p^v beyond 2^62");
  std::vector<u64> xr(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) xr[i] = reduce_mod(xi[i], *pmu);
  const Lifter L(Y, p, {});
  if (L.quadric_mod(xr.data(), *pmu) != 0) {
    LocalDensityValue zero = closed_form(p, ExactRational(0));
    zero.status = DensityStatus::stabilized;
    zero.level = mu;
    return zero;
  }
  if (!exhaustive && quadric_good(Y, p)) return closed_form(p, ExactRational::power(p, -mu * (Y.n() - 1)));
  return density_tree(Y, p, nullptr, FMode::none, 0, xi, mu, ctx);
}

Solubility is_locally_soluble(const AffineQuadric& Y, std::uint64_t p, int depth, const ParallelContext& ctx) {
  require_prime(p, "is_locally_soluble");
  if (depth < 1) throw PreconditionError("is_locally_soluble: depth must be >= 1");
  const Lifter L(Y, p, {});
  const auto N = static_cast<std::size_t>(Y.n());
  std::vector<u64> nodes;
  try {
    nodes = L.roots(ctx);
  } catch (const BudgetExceeded&) {
    return Solubility::unknown;
  }
  u64 pk = p;
  long double work = 0;
  for (int k = 1;; ++k) {
    const std::size_t count = nodes.size() / N;
    if (count == 0) return Solubility::insoluble;
    work += static_cast<long double>(count);
    for (std::size_t i = 0; i < count; ++i) {
      const u64* x = nodes.data() + i * N;
      const int v = L.gradient_valuation(x, pk, k);
      if (v >= k) continue;
      const auto M = try_pow(p, k + v);
      if (M && L.quadric_mod(x, *M) == 0) return Solubility::soluble;
    }
    if (k >= depth || !try_pow(p, k + 1) || work > static_cast<long double>(ctx.budget())) {
      return Solubility::unknown;
    }
    nodes = lift_all(L, nodes, k, pk, ctx);
    pk *= p;
  }
}

bool has_r_power_divisor_at(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t p, int r,
                            const ParallelContext& ctx) {
  const LocalDensityValue v = padic_density_f(Y, f, r, p, ctx);
  return v.status == DensityStatus::capped ? v.upper.is_zero() : v.value.is_zero();
}

}  // namespace powerfree
