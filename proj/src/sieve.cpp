#include "powerfree/sieve.hpp"

#include <algorithm>
#include <cmath>

#include "powerfree/arch.hpp"
#include "powerfree/errors.hpp"

namespace powerfree {
namespace {

constexpr std::size_t kChunks = 64;

bool divisible(const BigInt& v, std::uint64_t p, int r) {
  BigInt q = 1;
  for (int i = 0; i < r; ++i) q *= p;
  return v % q == 0;
}

std::int64_t sup_norm(std::span<const std::int64_t> x) {
  std::int64_t s = 0;
  for (std::int64_t v : x) s = std::max(s, v < 0 ? -v : v);
  return s;
}

}  // namespace

std::uint64_t sieve_cutoff(const IntPolynomial& f, int r, std::int64_t H) {
  if (r < 1) throw PreconditionError("sieve_cutoff: r must be >= 1");
  BigInt bound = f.coefficient_norm();
  for (int i = 0; i < f.degree(); ++i) bound *= std::max<std::int64_t>(H, 1);
  auto fits = [&](std::uint64_t k) {
    BigInt kr = 1;
    for (int i = 0; i < r; ++i) kr *= k;
    return kr <= bound;
  };
  auto k = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<long double>(bound), 1.0L / r)));
  k = std::max<std::uint64_t>(k, 1);
  while (k > 1 && !fits(k)) --k;
  while (fits(k + 1)) ++k;
  return k;
}

SieveBreakdown mobius_sieve_count(const AffineQuadric& Y, const IntPolynomial& f, int r, std::int64_t H,
                                  long double delta, const ParallelContext& ctx) {
  if (f.n() != Y.n()) throw PreconditionError("mobius_sieve_count: f has the wrong number of variables");
  return mobius_sieve_count(enumerate_points(Y, H, ctx), f, r, H, delta, ctx);
}

SieveBreakdown mobius_sieve_count(const PointList& points, const IntPolynomial& f, int r, std::int64_t H,
                                  long double delta, const ParallelContext& ctx) {
  if (r < 2) throw PreconditionError("mobius_sieve_count: r must be >= 2");
  if (!(delta > 0)) throw PreconditionError("mobius_sieve_count: delta must be positive");
  if (f.degree() < 1) throw PreconditionError("mobius_sieve_count: f must be non-constant");

  SieveBreakdown out;
  out.H = H;
  out.r = r;
  out.delta = delta;
  out.K_total = sieve_cutoff(f, r, H);
  ctx.require_budget(static_cast<long double>(out.K_total), "sieve moduli");
  const long double split = H <= 1 ? static_cast<long double>(std::max<std::int64_t>(H, 0))
                                   : std::pow(static_cast<long double>(H), delta) * (1 + 1e-15L);
  out.k_split = std::min<std::uint64_t>(out.K_total, static_cast<std::uint64_t>(std::floor(split)));
  ctx.require_budget(static_cast<long double>(points.size()) * static_cast<long double>(out.K_total),
                     "sieve divisibility tests");

  const std::vector<std::uint64_t> primes = primes_up_to(out.K_total);
  const auto mu = mobius_table(out.K_total);
  const std::vector<BigInt> values = evaluate_on(points, f);

  // For each point, the square-free k with k^r | f(x) are the products of the
  // primes p with p^r | f(x); so are the k with k^2 | f(x).
  struct Counts {
    std::vector<std::uint64_t> r_power, square;
  };
  const std::size_t total = values.size();
  const auto parts = ctx.map<Counts>(kChunks, [&](std::size_t chunk) {
    Counts c;
    c.r_power.assign(out.K_total + 1, 0);
    c.square.assign(out.K_total + 1, 0);
    const std::size_t lo = total * chunk / kChunks, hi = total * (chunk + 1) / kChunks;
    std::vector<std::uint64_t> pr, p2;
    auto spread = [&](const std::vector<std::uint64_t>& ps, std::vector<std::uint64_t>& into) {
      auto go = [&](auto&& self, std::size_t start, std::uint64_t k) -> void {
        ++into[k];
        for (std::size_t i = start; i < ps.size() && ps[i] <= out.K_total / k; ++i) self(self, i + 1, k * ps[i]);
      };
      go(go, 0, 1);
    };
    for (std::size_t i = lo; i < hi; ++i) {
      if ((i & 1023) == 0) ctx.poll();
      const BigInt& v = values[i];
      if (v == 0) continue;
      pr.clear();
      p2.clear();
      for (std::uint64_t p : primes) {
        if (!divisible(v, p, 2)) continue;
        p2.push_back(p);
        if (divisible(v, p, r)) pr.push_back(p);
      }
      spread(pr, c.r_power);
      spread(p2, c.square);
    }
    return c;
  });
  std::vector<std::uint64_t> U(out.K_total + 1, 0), U2(out.K_total + 1, 0);
  for (const Counts& c : parts) {
    for (std::uint64_t k = 1; k <= out.K_total; ++k) {
      U[k] += c.r_power[k];
      U2[k] += c.square[k];
    }
  }

  for (std::uint64_t k = 1; k <= out.K_total; ++k) {
    if (mu[k] == 0) continue;
    out.terms.push_back({k, mu[k], U[k]});
    const auto signed_term = static_cast<std::int64_t>(mu[k]) * static_cast<std::int64_t>(U[k]);
    if (k <= out.k_split) {
      out.N1 += signed_term;
    } else {
      out.N2 += U[k];
      out.signed_tail += signed_term;
      out.tail_square_bound += U2[k];
    }
  }
  out.N_direct = count_rfree(points, f, r);
  out.identity_ok = static_cast<std::int64_t>(out.N_direct) == out.N1 + out.signed_tail;
  out.tail_dominated = out.N2 <= out.tail_square_bound;
  return out;
}

ExperimentReport compare_report(const AffineQuadric& Y, const IntPolynomial& f, int r,
                                const std::vector<std::int64_t>& H_list, std::uint64_t P_max,
                                const ParallelContext& ctx) {
  if (H_list.empty()) throw PreconditionError("compare_report: empty H list");
  for (std::size_t i = 0; i < H_list.size(); ++i) {
    if (H_list[i] < 0 || (i > 0 && H_list[i] <= H_list[i - 1])) {
      throw PreconditionError("compare_report: H list must be increasing and non-negative");
    }
  }
  ExperimentReport out;
  out.r = r;
  out.series = singular_series(Y, f, r, P_max, ctx);
  out.components = Y.component_count();

  const PointList points = enumerate_points(Y, H_list.back(), ctx);
  const std::vector<BigInt> values = evaluate_on(points, f);
  std::vector<char> rfree(points.size());
  std::vector<int> component(points.size(), 0);
  ctx.parallel_for(kChunks, [&](std::size_t chunk) {
    const std::size_t lo = points.size() * chunk / kChunks, hi = points.size() * (chunk + 1) / kChunks;
    std::vector<long double> x(static_cast<std::size_t>(points.n));
    for (std::size_t i = lo; i < hi; ++i) {
      rfree[i] = values[i] != 0 && is_r_free(values[i], r);
      const auto p = points[i];
      std::copy(p.begin(), p.end(), x.begin());
      component[i] = real_component_of(Y, x);
    }
  });

  const bool split = out.components > 1;
  bool all_zero = true, all_predicted = true;
  for (std::int64_t H : H_list) {
    ReportRow row;
    row.H = H;
    if (split) row.N_by_component.assign(static_cast<std::size_t>(out.components), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (sup_norm(points[i]) > H) continue;
      ++row.points;
      if (!rfree[i]) continue;
      ++row.N;
      if (split) ++row.N_by_component[static_cast<std::size_t>(component[i])];
    }
    row.mu_inf = H == 0 ? 0 : real_density_fiber(Y, H, ctx).value;
    row.prediction = static_cast<long double>(out.series.partial_real) * row.mu_inf;
    if (row.prediction > 0) row.ratio = static_cast<long double>(row.N) / row.prediction;
    all_zero = all_zero && row.N == 0;
    all_predicted = all_predicted && row.prediction > 0;
    out.rows.push_back(std::move(row));
  }
  out.local_global_failure = all_zero && all_predicted;
  if (const auto& last = out.rows.back().ratio) {
    const long double nearest = std::round(*last);
    out.near_integer_ratio = nearest >= 2 && std::fabs(*last - nearest) < 0.1L;
  }
  return out;
}

DensityProfile rfree_density_profile(const AffineQuadric& Y, const IntPolynomial& f, std::int64_t H,
                                     const std::vector<int>& r_list, const ParallelContext& ctx) {
  for (int r : r_list) {
    if (r < 2 || r > 64) throw PreconditionError("rfree_density_profile: r must lie in [2, 64]");
  }
  DensityProfile out;
  out.H = H;
  const PointList points = enumerate_points(Y, H, ctx);
  out.points = points.size();
  const std::vector<BigInt> values = evaluate_on(points, f);
  const auto counts = ctx.map<std::vector<std::uint64_t>>(kChunks, [&](std::size_t chunk) {
    std::vector<std::uint64_t> c(r_list.size(), 0);
    const std::size_t lo = values.size() * chunk / kChunks, hi = values.size() * (chunk + 1) / kChunks;
    for (std::size_t i = lo; i < hi; ++i) {
      if (values[i] == 0) continue;
      for (std::size_t j = 0; j < r_list.size(); ++j) {
        if (is_r_free(values[i], r_list[j])) ++c[j];
      }
    }
    return c;
  });
  for (std::size_t j = 0; j < r_list.size(); ++j) {
    ProfileRow row{r_list[j], 0};
    for (const auto& c : counts) row.N += c[j];
    out.rows.push_back(row);
    if (row.N > 0 && (!out.smallest_nonzero_r || row.r < *out.smallest_nonzero_r)) out.smallest_nonzero_r = row.r;
  }
  for (const ProfileRow& a : out.rows) {
    for (const ProfileRow& b : out.rows) {
      if (a.r < b.r && a.N > b.N) out.monotone = false;
    }
  }
  return out;
}

}  // namespace powerfree
