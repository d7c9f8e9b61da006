#include "powerfree/arch.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "powerfree/errors.hpp"

namespace powerfree {
namespace {

using real = long double;

constexpr real kTol = 1e-11L;
// Nested integration cannot use more than the outer rule resolves.
constexpr real kNestedTol = 1e-7L;
constexpr std::uint64_t kBatch = 1 << 16;

// Real roots of A u^2 + B u + C strictly inside (lo, hi). Near-double roots
// contribute the vertex as well, so tangencies are never missed.
void quadratic_roots(real A, real B, real C, real lo, real hi, std::vector<real>& out) {
  auto keep = [&](real u) {
    if (std::isfinite(u) && u > lo && u < hi) out.push_back(u);
  };
  const real scale = std::fabs(A) + std::fabs(B) + std::fabs(C);
  if (scale == 0) return;
  if (std::fabs(A) <= 1e-18L * scale) {
    if (B != 0) keep(-C / B);
    return;
  }
  const real disc = B * B - 4 * A * C;
  if (disc < 0) {
    if (disc > -1e-9L * (B * B + std::fabs(4 * A * C))) keep(-B / (2 * A));
    return;
  }
  const real q = -(B + std::copysign(std::sqrt(disc), B)) / 2;
  keep(q / A);
  if (q != 0) keep(C / q);
}

// Interpolates a quadratic from its values at -1, 0, 1 and records its roots.
template <typename G>
void quadratic_split(G g, real lo, real hi, std::vector<real>& out) {
  const real gm = g(-1.0L), g0 = g(0.0L), gp = g(1.0L);
  quadratic_roots((gp + gm) / 2 - g0, (gp - gm) / 2, g0, lo, hi, out);
}

// An antiderivative of 1 / sqrt(alpha t^2 + beta t + gamma) on any interval
// where the radicand is positive.
real antiderivative(real alpha, real beta, real gamma, real t) {
  const real D = std::max<real>(0, (alpha * t + beta) * t + gamma);
  const real delta = beta * beta - 4 * alpha * gamma;
  const real s = 2 * alpha * t + beta;
  if (alpha > 0) {
    const real sa = std::sqrt(alpha);
    const real r = 2 * std::sqrt(alpha * D);
    if (s >= 0) return std::log(std::max(r + s, std::numeric_limits<real>::min())) / sa;
    if (delta != 0) return (std::log(std::fabs(delta)) - std::log(r - s)) / sa;
    return -std::log(-s) / sa;
  }
  if (alpha < 0) {
    if (delta <= 0) return 0;
    const real z = std::clamp<real>(s / std::sqrt(delta), -1, 1);
    return -std::asin(z) / std::sqrt(-alpha);
  }
  if (beta != 0) return 2 * std::sqrt(D) / beta;
  return gamma > 0 ? t / std::sqrt(gamma) : 0;
}

struct FiberCoefficients {
  real b0, b1;      // dQ/dx_p has the x_p-free part b0 + b1 t
  real c0, c1, c2;  // Q - m with x_p = 0 is c0 + c1 t + c2 t^2
  real alpha, beta, gamma;  // discriminant D(t) in x_p
};

class FiberIntegrator {
 public:
  FiberIntegrator(const AffineQuadric& Y, std::int64_t H, std::optional<int> component)
      : Y_(Y), H_(static_cast<real>(H)), component_(component) {
    const QuadraticForm& Q = Y.form();
    const int n = Q.n();
    pivot_ = pivot_coordinate(Q);
    a_ = static_cast<real>(Q.coeff(pivot_, pivot_));
    std::vector<int> rest;
    for (int i = 0; i < n; ++i) {
      if (i != pivot_) rest.push_back(i);
    }
    // Prefer an inner coordinate whose discriminant is genuinely quadratic.
    inner_ = rest.empty() ? -1 : rest.back();
    for (auto it = rest.rbegin(); it != rest.rend(); ++it) {
      const real b1 = static_cast<real>(Q.coeff(pivot_, *it));
      const real c2 = static_cast<real>(Q.coeff(*it, *it));
      if (b1 * b1 - 4 * a_ * c2 != 0) {
        inner_ = *it;
        break;
      }
    }
    for (int i : rest) {
      if (i != inner_) outer_.push_back(i);
    }
  }

  std::size_t outer_count() const noexcept { return outer_.size(); }
  real H() const noexcept { return H_; }

  FiberCoefficients coefficients(const std::vector<real>& w) const {
    const QuadraticForm& Q = Y_.form();
    FiberCoefficients k{};
    k.b1 = inner_ < 0 ? 0 : static_cast<real>(Q.coeff(pivot_, inner_));
    k.c2 = inner_ < 0 ? 0 : static_cast<real>(Q.coeff(inner_, inner_));
    k.b0 = 0;
    k.c1 = 0;
    k.c0 = -static_cast<real>(Y_.m());
    for (std::size_t i = 0; i < outer_.size(); ++i) {
      const int oi = outer_[i];
      k.b0 += static_cast<real>(Q.coeff(std::min(pivot_, oi), std::max(pivot_, oi))) * w[i];
      if (inner_ >= 0) k.c1 += static_cast<real>(Q.coeff(std::min(inner_, oi), std::max(inner_, oi))) * w[i];
      for (std::size_t j = i; j < outer_.size(); ++j) {
        const int oj = outer_[j];
        k.c0 += static_cast<real>(Q.coeff(std::min(oi, oj), std::max(oi, oj))) * w[i] * w[j];
      }
    }
    k.alpha = k.b1 * k.b1 - 4 * a_ * k.c2;
    k.beta = 2 * k.b0 * k.b1 - 4 * a_ * k.c1;
    k.gamma = k.b0 * k.b0 - 4 * a_ * k.c0;
    return k;
  }

  // Closed-form integral over the inner coordinate for fixed outer values.
  real inner(const std::vector<real>& w) const {
    const FiberCoefficients k = coefficients(w);
    if (inner_ < 0) return 0;
    std::vector<real> cuts{-H_, H_};
    quadratic_roots(k.alpha, k.beta, k.gamma, -H_, H_, cuts);
    for (real h : {-H_, H_}) {
      quadratic_roots(k.c2, h * k.b1 + k.c1, a_ * h * h + h * k.b0 + k.c0, -H_, H_, cuts);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<long double> x(static_cast<std::size_t>(Y_.n()), 0);
    for (std::size_t i = 0; i < outer_.size(); ++i) x[outer_[i]] = w[i];
    real total = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const real t0 = cuts[i], t1 = cuts[i + 1];
      if (!(t1 > t0)) continue;
      const real mid = (t0 + t1) / 2;
      const real D = (k.alpha * mid + k.beta) * mid + k.gamma;
      if (D <= 0) continue;
      const real b = k.b0 + k.b1 * mid;
      int branches = 0;
      for (int sigma : {-1, 1}) {
        const real xp = (-b + sigma * std::sqrt(D)) / (2 * a_);
        if (std::fabs(xp) > H_) continue;
        if (component_) {
          x[inner_] = mid;
          x[pivot_] = xp;
          if (Y_.component_of(std::span<const long double>(x)) != *component_) continue;
        }
        ++branches;
      }
      if (branches == 0) continue;
      total += branches * (antiderivative(k.alpha, k.beta, k.gamma, t1) - antiderivative(k.alpha, k.beta, k.gamma, t0));
    }
    return total;
  }

  // Points in the last outer variable u where the inner integral fails to be
  // smooth, for fixed earlier outer variables.
  std::vector<real> u_splits(std::vector<real> w) const {
    std::vector<real> cuts{-H_, H_};
    const std::size_t last = w.size() - 1;
    auto at = [&](real u) {
      w[last] = u;
      return coefficients(w);
    };
    const real H = H_;
    quadratic_split([&](real u) { auto k = at(u); return k.beta * k.beta - 4 * k.alpha * k.gamma; }, -H, H, cuts);
    for (real t : {-H, H}) {
      quadratic_split([&](real u) { auto k = at(u); return (k.alpha * t + k.beta) * t + k.gamma; }, -H, H, cuts);
    }
    for (real h : {-H, H}) {
      for (real t : {-H, H}) {
        quadratic_split([&](real u) {
          auto k = at(u);
          return a_ * h * h + h * (k.b0 + k.b1 * t) + k.c0 + (k.c1 + k.c2 * t) * t;
        }, -H, H, cuts);
      }
      quadratic_split([&](real u) {
        auto k = at(u);
        const real lin = h * k.b1 + k.c1;
        return lin * lin - 4 * k.c2 * (a_ * h * h + h * k.b0 + k.c0);
      }, -H, H, cuts);
      // The double root x_p = -b / 2a passing through x_p = h.
      quadratic_split([&](real u) {
        auto k = at(u);
        if (k.b1 == 0) return k.b0 + 2 * a_ * h;
        const real t = (-2 * a_ * h - k.b0) / k.b1;
        return a_ * h * h + h * (k.b0 + k.b1 * t) + k.c0 + (k.c1 + k.c2 * t) * t;
      }, -H, H, cuts);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
  }

  // Integral over u in [lo, hi] for fixed earlier outer variables.
  real integrate_u(std::vector<real> w, real lo, real hi, real* error) const {
    real err = 0, l1 = 0;
    const std::size_t last = w.size() - 1;
    auto g = [&](real u) {
      std::vector<real> v = w;
      v[last] = u;
      const real value = inner(v);
      return std::isfinite(value) ? value : 0.0L;
    };
    real value;
    if (outer_.size() >= 2) {
      value = boost::math::quadrature::gauss_kronrod<real, 15>::integrate(g, lo, hi, 7, kNestedTol, &err, &l1);
    } else {
      thread_local boost::math::quadrature::tanh_sinh<real> ts;
      value = ts.integrate(g, lo, hi, kTol, &err, &l1);
    }
    if (error) *error += err;
    return value;
  }

  real integrate_last(std::vector<real> w, real* error) const {
    const std::vector<real> cuts = u_splits(w);
    real total = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate_u(w, cuts[i], cuts[i + 1], error);
    return total;
  }

  // Nested adaptive quadrature over outer variables w[depth .. size-2].
  real integrate_from(std::vector<real>& w, std::size_t depth, real lo, real hi, real* error) const {
    if (depth + 1 == w.size()) return integrate_last(w, error);
    real err = 0;
    const real value = boost::math::quadrature::gauss_kronrod<real, 15>::integrate(
        [&](real v) {
          std::vector<real> copy = w;
          copy[depth] = v;
          real inner_err = 0;
          return integrate_from(copy, depth + 1, -H_, H_, &inner_err);
        },
        lo, hi, 10, 1e-8L, &err);
    if (error) *error += err;
    return value;
  }

 private:
  const AffineQuadric& Y_;
  real H_;
  std::optional<int> component_;
  int pivot_ = 0;
  int inner_ = -1;
  real a_ = 0;
  std::vector<int> outer_;
};

// Length of {z in [-H, H] : |a z^2 + b z + c| < e/2}.
real shell_length(real a, real b, real c, real H, real e) {
  std::vector<real> cuts{-H, H};
  quadratic_roots(a, b, c - e / 2, -H, H, cuts);
  quadratic_roots(a, b, c + e / 2, -H, H, cuts);
  std::sort(cuts.begin(), cuts.end());
  real len = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const real mid = (cuts[i] + cuts[i + 1]) / 2;
    if (std::fabs((a * mid + b) * mid + c) < e / 2) len += cuts[i + 1] - cuts[i];
  }
  return len;
}

// Pairwise sum in index order.
real pairwise_sum(const std::vector<real>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 0) return 0;
  if (hi - lo == 1) return v[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

}  // namespace

int pivot_coordinate(const QuadraticForm& Q) {
  for (int i = Q.n() - 1; i >= 0; --i) {
    if (Q.coeff(i, i) != 0) return i;
  }
  throw PreconditionError("real density: Q needs a coordinate with nonzero diagonal coefficient");
}

RealDensityEstimate real_density_fiber(const AffineQuadric& Y, std::int64_t H, const ParallelContext& ctx,
                                       std::optional<int> component) {
  if (H < 0) throw PreconditionError("real_density_fiber: H must be >= 0");
  if (component && (*component < 0 || *component >= Y.component_count())) {
    throw PreconditionError("real_density_fiber: no such real component");
  }
  RealDensityEstimate out;
  out.method = "fiber";
  out.H = H;
  out.component = component;
  if (H == 0 || Y.n() < 2) return out;
  const FiberIntegrator F(Y, H, component);
  const real h = static_cast<real>(H);

  if (F.outer_count() == 0) {
    out.value = F.inner({});
    return out;
  }
  std::vector<real> w(F.outer_count(), 0);
  if (F.outer_count() == 1) {
    const std::vector<real> cuts = F.u_splits(w);
    std::vector<real> errors(cuts.size() - 1, 0);
    const auto parts = ctx.map<real>(cuts.size() - 1, [&](std::size_t i) {
      ctx.poll();
      return F.integrate_u(w, cuts[i], cuts[i + 1], &errors[i]);
    });
    out.value = pairwise_sum(parts, 0, parts.size());
    out.error = pairwise_sum(errors, 0, errors.size());
    return out;
  }
  // Fixed chunks of the first outer variable.
  constexpr std::size_t kChunks = 16;
  std::vector<real> errors(kChunks, 0);
  const auto parts = ctx.map<real>(kChunks, [&](std::size_t i) {
    ctx.poll();
    std::vector<real> local = w;
    const real lo = -h + 2 * h * static_cast<real>(i) / kChunks;
    const real hi = -h + 2 * h * static_cast<real>(i + 1) / kChunks;
    return F.integrate_from(local, 0, lo, hi, &errors[i]);
  });
  out.value = pairwise_sum(parts, 0, parts.size());
  out.error = pairwise_sum(errors, 0, errors.size());
  return out;
}

RealDensityEstimate real_density_component(const AffineQuadric& Y, std::int64_t H, int component,
                                           const ParallelContext& ctx) {
  return real_density_fiber(Y, H, ctx, component);
}

RealDensityEstimate real_density_shell(const AffineQuadric& Y, std::int64_t H, long double eps,
                                       std::uint64_t samples, std::uint64_t seed, const ParallelContext& ctx) {
  if (!(eps > 0)) throw PreconditionError("real_density_shell: eps must be positive");
  if (samples == 0) throw PreconditionError("real_density_shell: samples must be positive");
  if (H < 0) throw PreconditionError("real_density_shell: H must be >= 0");
  RealDensityEstimate out;
  out.method = "shell";
  out.H = H;
  out.samples = samples;
  if (H == 0) return out;
  ctx.require_budget(static_cast<long double>(samples), "shell sampling");

  const QuadraticForm& Q = Y.form();
  const int n = Q.n();
  const int p = pivot_coordinate(Q);
  std::vector<int> rest;
  for (int i = 0; i < n; ++i) {
    if (i != p) rest.push_back(i);
  }
  const real h = static_cast<real>(H);
  const real a = static_cast<real>(Q.coeff(p, p));
  const std::size_t batches = (samples + kBatch - 1) / kBatch;

  struct Moments {
    real sum_r = 0, sum_r2 = 0, sum_1 = 0, sum_2 = 0;
  };
  const auto parts = ctx.map<Moments>(batches, [&](std::size_t batch) {
    ctx.poll();
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> coord(-static_cast<double>(H), static_cast<double>(H));
    const std::uint64_t count = std::min<std::uint64_t>(kBatch, samples - batch * kBatch);
    std::vector<real> y(rest.size());
    Moments m;
    for (std::uint64_t s = 0; s < count; ++s) {
      for (auto& v : y) v = coord(rng);
      real b = 0, c = -static_cast<real>(Y.m());
      for (std::size_t i = 0; i < rest.size(); ++i) {
        b += static_cast<real>(Q.coeff(std::min(p, rest[i]), std::max(p, rest[i]))) * y[i];
        for (std::size_t j = i; j < rest.size(); ++j) {
          c += static_cast<real>(Q.coeff(std::min(rest[i], rest[j]), std::max(rest[i], rest[j]))) * y[i] * y[j];
        }
      }
      const real x1 = shell_length(a, b, c, h, eps) / eps;
      const real x2 = shell_length(a, b, c, h, eps / 2) / (eps / 2);
      const real r = (4 * x2 - x1) / 3;
      m.sum_r += r;
      m.sum_r2 += r * r;
      m.sum_1 += x1;
      m.sum_2 += x2;
    }
    return m;
  });
  std::vector<real> r(batches), r2(batches), s1(batches), s2(batches);
  for (std::size_t i = 0; i < batches; ++i) {
    r[i] = parts[i].sum_r;
    r2[i] = parts[i].sum_r2;
    s1[i] = parts[i].sum_1;
    s2[i] = parts[i].sum_2;
  }
  const real N = static_cast<real>(samples);
  const real volume = std::pow(2 * h, static_cast<real>(n - 1));
  const real mean = pairwise_sum(r, 0, batches) / N;
  const real var = std::max<real>(0, pairwise_sum(r2, 0, batches) / N - mean * mean);
  const real e1 = pairwise_sum(s1, 0, batches) / N, e2 = pairwise_sum(s2, 0, batches) / N;
  out.value = volume * mean;
  out.error = volume * (std::sqrt(var / N) + std::fabs(e1 - e2) / 15);
  return out;
}

}  // namespace powerfree
