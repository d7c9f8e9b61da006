#include "powerfree/enumerate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "powerfree/errors.hpp"

namespace powerfree {
namespace {

// Variables are split into a pivot x_p (solved for), an inner variable t
// (scanned with finite differences) and the remaining outer variables.
struct Plan {
  int n = 0;
  int pivot = 0;
  int inner = -1;
  std::vector<int> outer;
  const QuadraticPolynomial* q = nullptr;
  bool quadratic_pivot = true;

  std::int64_t a(int i, int j) const { return q->quad.coeff(std::min(i, j), std::max(i, j)); }
  std::int64_t l(int i) const { return q->linear[i]; }
};

Plan make_plan(const QuadraticPolynomial& q) {
  Plan plan;
  plan.q = &q;
  plan.n = q.n();
  int pivot = -1;
  for (int i = plan.n - 1; i >= 0 && pivot < 0; --i) {
    if (q.quad.coeff(i, i) != 0) pivot = i;
  }
  if (pivot < 0) {
    // No square terms: the equation is linear in any variable it involves.
    plan.quadratic_pivot = false;
    for (int i = plan.n - 1; i >= 0 && pivot < 0; --i) {
      bool involved = q.linear[i] != 0;
      for (int j = 0; j < plan.n; ++j) involved |= j != i && q.quad.coeff(std::min(i, j), std::max(i, j)) != 0;
      if (involved) pivot = i;
    }
    if (pivot < 0) pivot = plan.n - 1;  // constant polynomial
  }
  plan.pivot = pivot;
  for (int i = plan.n - 1; i >= 0; --i) {
    if (i != pivot) {
      plan.inner = i;
      break;
    }
  }
  for (int i = 0; i < plan.n; ++i) {
    if (i != pivot && i != plan.inner) plan.outer.push_back(i);
  }
  return plan;
}

// Upper bound for |D| (quadratic pivot) or for |b|, |c| (linear pivot).
long double magnitude_bound(const Plan& P, std::int64_t B) {
  const long double H = static_cast<long double>(B);
  long double bb = std::fabs(static_cast<long double>(P.l(P.pivot)));
  long double bc = std::fabs(static_cast<long double>(P.q->constant));
  for (int j = 0; j < P.n; ++j) {
    if (j == P.pivot) continue;
    bb += std::fabs(static_cast<long double>(P.a(P.pivot, j))) * H;
    bc += std::fabs(static_cast<long double>(P.l(j))) * H;
    for (int k = j; k < P.n; ++k) {
      if (k != P.pivot) bc += std::fabs(static_cast<long double>(P.a(j, k))) * H * H;
    }
  }
  const long double a = std::fabs(static_cast<long double>(P.a(P.pivot, P.pivot)));
  const long double d = P.quadratic_pivot ? bb * bb + 4 * a * bc : std::max(bb, bc);
  // Finite differences and t-extrapolation stay within a small multiple.
  return 8 * d + 8;
}

template <typename T>
bool square_root(const T& v, T& root);

template <>
bool square_root<std::int64_t>(const std::int64_t& v, std::int64_t& root) {
  // Quadratic residues mod 64 and mod 63 reject most non-squares cheaply.
  static constexpr std::uint64_t kMask64 = 0x0202021202030213ULL;
  static const std::array<bool, 63> kRes63 = [] {
    std::array<bool, 63> r{};
    for (int i = 0; i < 63; ++i) r[static_cast<std::size_t>(i * i % 63)] = true;
    return r;
  }();
  if (v < 0) return false;
  if (!((kMask64 >> (v & 63)) & 1)) return false;
  if (!kRes63[static_cast<std::size_t>(v % 63)]) return false;
  std::uint64_t r;
  if (!is_square(static_cast<std::uint64_t>(v), &r)) return false;
  root = static_cast<std::int64_t>(r);
  return true;
}

template <>
bool square_root<i128>(const i128& v, i128& root) {
  if (v < 0) return false;
  static constexpr std::uint64_t kMask64 = 0x0202021202030213ULL;
  if (!((kMask64 >> (static_cast<std::uint64_t>(v) & 63)) & 1)) return false;
  const u128 u = static_cast<u128>(v);
  u128 r = static_cast<u128>(std::sqrt(static_cast<long double>(u)));
  while (r > 0 && r * r > u) --r;
  while ((r + 1) * (r + 1) <= u) ++r;
  if (r * r != u) return false;
  root = static_cast<i128>(r);
  return true;
}

template <>
bool square_root<BigInt>(const BigInt& v, BigInt& root) {
  return is_square(v, &root);
}

template <typename T>
T floor_div_exact(const T& num, const T& den, bool& exact) {
  exact = num % den == 0;
  return num / den;
}

template <typename T>
std::int64_t as_i64(const T& v) {
  return static_cast<std::int64_t>(v);
}

// Scans fibers with outer variables fixed and t in [t_lo, t_hi]. Calls
// emit(t, x_lo, x_hi) for every solution range of the pivot (x_lo == x_hi
// except for the degenerate linear case where every pivot value works).
template <typename W, typename T, typename Emit>
void scan_fiber(const Plan& P, std::span<const std::int64_t> ov, std::int64_t t_lo, std::int64_t t_hi,
                std::int64_t B, Emit&& emit) {
  const int p = P.pivot;
  const int t = P.inner;
  W b_o = P.l(p), e_o = t >= 0 ? W(P.l(t)) : W(0), c_o = P.q->constant;
  for (std::size_t k = 0; k < P.outer.size(); ++k) {
    const int i = P.outer[k];
    const W xi = ov[k];
    b_o += W(P.a(p, i)) * xi;
    if (t >= 0) e_o += W(P.a(t, i)) * xi;
    c_o += W(P.l(i)) * xi;
    for (std::size_t k2 = k; k2 < P.outer.size(); ++k2) c_o += W(P.a(i, P.outer[k2])) * xi * W(ov[k2]);
  }
  const W a = P.a(p, p);
  const W beta_t = t >= 0 ? W(P.a(p, t)) : W(0);
  const W a_tt = t >= 0 ? W(P.a(t, t)) : W(0);

  if (P.quadratic_pivot) {
    const W alpha = beta_t * beta_t - 4 * a * a_tt;
    const W beta = 2 * b_o * beta_t - 4 * a * e_o;
    const W gamma = b_o * b_o - 4 * a * c_o;
    const W t0 = t_lo;
    T D = T(alpha * t0 * t0 + beta * t0 + gamma);
    T dD = T(alpha * (2 * t0 + 1) + beta);
    const T ddD = T(2 * alpha);
    T b = T(b_o + beta_t * t0);
    const T bt = T(beta_t);
    const T den = T(2 * a);
    const T HB = T(B);
    T s;
    for (std::int64_t tv = t_lo; tv <= t_hi; ++tv) {
      if (D >= 0 && square_root<T>(D, s)) {
        std::array<T, 2> roots;
        int count = 0;
        bool exact = false;
        T x1 = floor_div_exact<T>(T(-b - s), den, exact);
        if (exact && x1 >= -HB && x1 <= HB) roots[static_cast<std::size_t>(count++)] = x1;
        if (s != 0) {
          T x2 = floor_div_exact<T>(T(-b + s), den, exact);
          if (exact && x2 >= -HB && x2 <= HB) roots[static_cast<std::size_t>(count++)] = x2;
        }
        if (count == 2 && roots[0] > roots[1]) std::swap(roots[0], roots[1]);
        for (int k = 0; k < count; ++k) {
          const std::int64_t xv = as_i64(roots[static_cast<std::size_t>(k)]);
          emit(tv, xv, xv);
        }
      }
      D += dD;
      dD += ddD;
      b += bt;
    }
    return;
  }

  // Linear in the pivot: b(t) x + c(t) = 0.
  const W t0 = t_lo;
  T b = T(b_o + beta_t * t0);
  T c = T(a_tt * t0 * t0 + e_o * t0 + c_o);
  T dc = T(a_tt * (2 * t0 + 1) + e_o);
  const T ddc = T(2 * a_tt);
  const T bt = T(beta_t);
  const T HB = T(B);
  for (std::int64_t tv = t_lo; tv <= t_hi; ++tv) {
    if (b != 0) {
      bool exact = false;
      T x = floor_div_exact<T>(T(-c), b, exact);
      if (exact && x >= -HB && x <= HB) {
        const std::int64_t xv = as_i64(x);
        emit(tv, xv, xv);
      }
    } else if (c == 0) {
      emit(tv, -B, B);
    }
    b += bt;
    c += dc;
    dc += ddc;
  }
}

constexpr std::size_t kMaxChunks = 64;

// Runs `body(chunk, outer values, t_lo, t_hi)` over every fiber, with fibers
// grouped into a fixed number of contiguous chunks of the outermost variable.
template <typename Body>
void for_each_fiber_chunked(const Plan& P, std::int64_t B, const ParallelContext& ctx, Body&& body) {
  const std::int64_t width = 2 * B + 1;
  const std::size_t chunks = static_cast<std::size_t>(std::min<std::int64_t>(width, kMaxChunks));
  const bool split_outer = !P.outer.empty();
  ctx.parallel_for(chunks, [&](std::size_t c) {
    const std::int64_t lo = -B + static_cast<std::int64_t>(c) * width / static_cast<std::int64_t>(chunks);
    const std::int64_t hi = -B + static_cast<std::int64_t>(c + 1) * width / static_cast<std::int64_t>(chunks) - 1;
    if (!split_outer) {
      ctx.poll();
      const std::int64_t t_lo = P.inner >= 0 ? lo : 0;
      const std::int64_t t_hi = P.inner >= 0 ? hi : (c == 0 ? 0 : -1);
      if (t_lo <= t_hi) body(c, std::span<const std::int64_t>{}, t_lo, t_hi);
      return;
    }
    std::vector<std::int64_t> ov(P.outer.size(), -B);
    for (std::int64_t first = lo; first <= hi; ++first) {
      ov[0] = first;
      for (std::size_t k = 1; k < ov.size(); ++k) ov[k] = -B;
      for (;;) {
        ctx.poll();
        body(c, std::span<const std::int64_t>(ov), -B, B);
        std::size_t k = ov.size() - 1;
        while (k >= 1 && ov[k] == B) ov[k--] = -B;
        if (k == 0) break;
        ++ov[k];
      }
    }
  });
}

enum class Width { narrow, wide, big };

Width choose_width(const Plan& P, std::int64_t B) {
  const long double bound = magnitude_bound(P, B);
  if (bound < std::ldexp(1.0L, 61)) return Width::narrow;
  if (bound < std::ldexp(1.0L, 124)) return Width::wide;
  return Width::big;
}

template <typename Emit>
void dispatch_fiber(Width w, const Plan& P, std::span<const std::int64_t> ov, std::int64_t t_lo, std::int64_t t_hi,
                    std::int64_t B, Emit&& emit) {
  switch (w) {
    case Width::narrow:
      scan_fiber<i128, std::int64_t>(P, ov, t_lo, t_hi, B, emit);
      break;
    case Width::wide:
      scan_fiber<i128, i128>(P, ov, t_lo, t_hi, B, emit);
      break;
    case Width::big:
      scan_fiber<BigInt, BigInt>(P, ov, t_lo, t_hi, B, emit);
      break;
  }
}

void check_box(std::int64_t B, int n, const ParallelContext& ctx) {
  if (B < 0) throw PreconditionError("box size must be non-negative");
  if (B > (std::int64_t{1} << 40)) throw PreconditionError("box size beyond supported range");
  const long double fibers = powl(static_cast<long double>(2 * B + 1), std::max(0, n - 1));
  ctx.require_budget(fibers, "enumeration");
}

bool lex_less(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

PointList enumerate_zeros(const QuadraticPolynomial& q, std::int64_t B, const ParallelContext& ctx) {
  const int n = q.n();
  check_box(B, n, ctx);
  const Plan P = make_plan(q);
  const Width w = choose_width(P, B);
  const std::size_t chunks = static_cast<std::size_t>(std::min<std::int64_t>(2 * B + 1, kMaxChunks));
  std::vector<std::vector<std::int64_t>> parts(chunks);

  for_each_fiber_chunked(P, B, ctx, [&](std::size_t c, std::span<const std::int64_t> ov, std::int64_t t_lo,
                                        std::int64_t t_hi) {
    auto& out = parts[c];
    dispatch_fiber(w, P, ov, t_lo, t_hi, B, [&](std::int64_t tv, std::int64_t x_lo, std::int64_t x_hi) {
      for (std::int64_t xv = x_lo; xv <= x_hi; ++xv) {
        const std::size_t base = out.size();
        out.resize(base + static_cast<std::size_t>(n));
        for (std::size_t k = 0; k < P.outer.size(); ++k) out[base + static_cast<std::size_t>(P.outer[k])] = ov[k];
        if (P.inner >= 0) out[base + static_cast<std::size_t>(P.inner)] = tv;
        out[base + static_cast<std::size_t>(P.pivot)] = xv;
      }
    });
  });

  PointList result;
  result.n = n;
  for (auto& part : parts) result.coords.insert(result.coords.end(), part.begin(), part.end());

  // Loop order is (outer, inner, pivot); restore lexicographic order.
  const std::size_t count = result.size();
  bool sorted = true;
  for (std::size_t i = 1; i < count && sorted; ++i) sorted = !lex_less(result[i], result[i - 1]);
  if (!sorted) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return lex_less(result[a], result[b]); });
    std::vector<std::int64_t> coords;
    coords.reserve(result.coords.size());
    for (std::size_t i : idx) coords.insert(coords.end(), result[i].begin(), result[i].end());
    result.coords = std::move(coords);
  }
  return result;
}

std::uint64_t count_zeros(const QuadraticPolynomial& q, std::int64_t B, const ParallelContext& ctx) {
  check_box(B, q.n(), ctx);
  const Plan P = make_plan(q);
  const Width w = choose_width(P, B);
  const std::size_t chunks = static_cast<std::size_t>(std::min<std::int64_t>(2 * B + 1, kMaxChunks));
  std::vector<std::uint64_t> counts(chunks, 0);
  for_each_fiber_chunked(P, B, ctx, [&](std::size_t c, std::span<const std::int64_t> ov, std::int64_t t_lo,
                                        std::int64_t t_hi) {
    dispatch_fiber(w, P, ov, t_lo, t_hi, B, [&](std::int64_t, std::int64_t x_lo, std::int64_t x_hi) {
      counts[c] += static_cast<std::uint64_t>(x_hi - x_lo + 1);
    });
  });
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

PointList enumerate_points(const AffineQuadric& Y, std::int64_t H, const ParallelContext& ctx) {
  Y.require_valid();
  return enumerate_zeros(QuadraticPolynomial::from_quadric(Y), H, ctx);
}

std::vector<BigInt> evaluate_on(const PointList& points, const IntPolynomial& f) {
  if (f.n() != points.n) throw PreconditionError("polynomial and points have different dimensions");
  std::vector<BigInt> values;
  values.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) values.push_back(f.eval(points[i]));
  return values;
}

std::uint64_t count_rfree(const PointList& points, const IntPolynomial& f, int r) {
  if (r < 2) throw PreconditionError("r must be at least 2");
  if (f.n() != points.n) throw PreconditionError("polynomial and points have different dimensions");
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    i128 v;
    if (f.eval_i128(points[i], v) && v >= std::numeric_limits<std::int64_t>::min() &&
        v <= std::numeric_limits<std::int64_t>::max()) {
      count += is_r_free(static_cast<std::int64_t>(v), r) ? 1 : 0;
    } else {
      count += is_r_free(f.eval(points[i]), r) ? 1 : 0;
    }
  }
  return count;
}

std::uint64_t count_rfree_direct(const AffineQuadric& Y, const IntPolynomial& f, int r, std::int64_t H,
                                 const ParallelContext& ctx) {
  return count_rfree(enumerate_points(Y, H, ctx), f, r);
}

std::uint64_t count_congruence(const PointList& points, std::uint64_t ell, std::span<const std::int64_t> xi) {
  if (ell == 0) throw PreconditionError("modulus must be positive");
  if (xi.size() != static_cast<std::size_t>(points.n)) throw PreconditionError("residue class has wrong length");
  std::vector<std::uint64_t> target(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) target[k] = reduce_mod(xi[k], ell);
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto x = points[i];
    bool match = true;
    for (std::size_t k = 0; k < x.size() && match; ++k) match = reduce_mod(x[k], ell) == target[k];
    count += match ? 1 : 0;
  }
  return count;
}

std::uint64_t count_congruence(const AffineQuadric& Y, std::int64_t H, std::uint64_t ell,
                               std::span<const std::int64_t> xi, const ParallelContext& ctx) {
  return count_congruence(enumerate_points(Y, H, ctx), ell, xi);
}

std::uint64_t count_divisible(const PointList& points, const IntPolynomial& f, std::uint64_t ell) {
  if (ell == 0) throw PreconditionError("modulus must be positive");
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    i128 v;
    if (f.eval_i128(points[i], v)) {
      if (v != 0 && reduce_mod(v, ell) == 0) ++count;
    } else {
      const BigInt big = f.eval(points[i]);
      if (big != 0 && reduce_mod(big, ell) == 0) ++count;
    }
  }
  return count;
}

std::uint64_t count_divisible(const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t ell, std::int64_t H,
                              const ParallelContext& ctx) {
  return count_divisible(enumerate_points(Y, H, ctx), f, ell);
}

std::uint64_t count_zero_locus(const PointList& points, const IntPolynomial& g) {
  if (g.is_zero()) throw PreconditionError("count_zero_locus: g vanishes identically");
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    i128 v;
    if (g.eval_i128(points[i], v)) {
      count += v == 0 ? 1 : 0;
    } else {
      count += g.eval(points[i]) == 0 ? 1 : 0;
    }
  }
  return count;
}

std::uint64_t count_zero_locus(const AffineQuadric& Y, const IntPolynomial& g, std::int64_t H,
                               const ParallelContext& ctx) {
  if (g.is_zero()) throw PreconditionError("count_zero_locus: g vanishes identically");
  return count_zero_locus(enumerate_points(Y, H, ctx), g);
}

AffineCount count_affine_quadratic(const QuadraticPolynomial& q, std::int64_t B, const ParallelContext& ctx) {
  if (q.n() < 2) throw PreconditionError("count_affine_quadratic: at least two variables required");
  AffineCount out;
  const Homogenization h = homogenize(q);
  out.rank_R = h.R.rank();
  out.rank_q0 = h.q0.rank();
  out.absolutely_irreducible = out.rank_R >= 3;
  out.hypotheses_hold = out.absolutely_irreducible && out.rank_q0 >= 2;
  out.count = count_zeros(q, B, ctx);
  return out;
}

int real_component_of(const AffineQuadric& Y, std::span<const long double> x) { return Y.component_of(x); }

}  // namespace powerfree
