// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "powerfree/arith.hpp"
#include "powerfree/arch.hpp"
#include "powerfree/enumerate.hpp"
#include "powerfree/euler.hpp"
#include "powerfree/lattice.hpp"
#include "powerfree/localdens.hpp"
#include "powerfree/sieve.hpp"

using namespace powerfree;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
  json data;  // everything the criterion computed; compared across worker counts
};

using Criterion = std::function<Outcome(const ParallelContext&)>;

IntPolynomial monomial_sum(int n, std::initializer_list<std::vector<int>> exponents) {
  IntPolynomial f(n);
  for (const auto& e : exponents) f.add_term(e, 1);
  return f;
}

AffineQuadric diagonal(std::vector<std::int64_t> d, std::int64_t m) {
  return AffineQuadric(QuadraticForm::diagonal(d), m);
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// x1^2 + x2^2 - 2 x3^2 = 1
AffineQuadric ternary() { return diagonal({1, 1, -2}, 1); }

Outcome borovoi_rudnick(const ParallelContext& ctx) {
  const std::vector<std::tuple<int, int, std::int64_t>> terms{{0, 0, -9}, {0, 1, 2}, {1, 1, 7}, {2, 2, 2}};
  const AffineQuadric Y(QuadraticForm::from_coefficients(3, terms), 1);
  const IntPolynomial f = monomial_sum(3, {{0, 0, 1}});
  Outcome out;

  const PointList pts = enumerate_points(Y, 10'000, ctx);
  std::vector<std::uint64_t> insoluble;
  for (std::uint64_t p : primes_up_to(97)) {
    if (is_locally_soluble(Y, p, 4, ctx) != Solubility::soluble) insoluble.push_back(p);
  }
  const SeriesEstimate s = singular_series(Y, f, 2, 97, ctx);

  out.data = {{"points", pts.size()}, {"insoluble", insoluble}, {"partial", s.partial.to_string()}};
  out.pass = pts.empty() && insoluble.empty() && s.partial.sign() > 0;
  out.summary = std::to_string(pts.size()) + " points with |x| <= 10^4, " + std::to_string(insoluble.size()) +
                " primes <= 97 without local points, partial product " +
                fmt("%.6g", static_cast<double>(s.partial.to_real80()));
  return out;
}

Outcome sieve_identity(const ParallelContext& ctx) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::int64_t> coef(-5, 5);
  const std::vector<std::function<IntPolynomial(int)>> fs{
      [](int n) { std::vector<int> e(n, 0); e[0] = 1; return monomial_sum(n, {e}); },
      [](int n) {
        std::vector<int> a(n, 0), b(n, 0);
        a[0] = 1;
        b[1] = 1;
        return monomial_sum(n, {a, b});
      },
      [](int n) {
        std::vector<int> a(n, 0), b(n, 0);
        a[0] = 2;
        b[1] = 2;
        return monomial_sum(n, {a, b});
      }};
  Outcome out;
  out.data = json::array();
  int ok = 0, attempts = 0;
  std::uint64_t points = 0;
  for (int instance = 0; instance < 20; ++instance) {
    const int n = instance % 2 == 0 ? 3 : 4;
    for (;;) {
      ++attempts;
      std::vector<std::tuple<int, int, std::int64_t>> terms;
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) terms.emplace_back(i, j, coef(rng));
      }
      const std::int64_t m = coef(rng);
      if (m == 0) continue;
      const AffineQuadric Y(QuadraticForm::from_coefficients(n, terms), m);
      if (!Y.validate().ok()) continue;
      const PointList pts = enumerate_points(Y, 40, ctx);
      if (pts.empty()) continue;
      const IntPolynomial f = fs[static_cast<std::size_t>(instance % 3)](n);
      const SieveBreakdown b = mobius_sieve_count(pts, f, 2, 40, 0.25L, ctx);
      ok += b.identity_ok ? 1 : 0;
      points += pts.size();
      out.data.push_back(json{{"Y", Y.form().to_string() + " = " + std::to_string(m)},
                          {"f", f.to_string()},
                          {"N", b.N_direct},
                          {"N1", b.N1},
                          {"tail", b.signed_tail},
                          {"identity_ok", b.identity_ok}});
      break;
    }
  }
  out.pass = ok == 20;
  out.summary = std::to_string(ok) + "/20 instances satisfy the identity exactly (" + std::to_string(points) +
                " points, " + std::to_string(attempts) + " draws)";
  return out;
}

// #{x mod q : x1^2 + x2^2 - 2 x3^2 = 1, x3 = 0 mod q}
std::uint64_t brute_rho_x3(std::uint64_t q) {
  std::uint64_t count = 0;
  for (std::uint64_t a = 0; a < q; ++a) {
    for (std::uint64_t b = 0; b < q; ++b) count += (a * a + b * b) % q == 1 % q ? 1 : 0;
  }
  return count;
}

Outcome hensel(const ParallelContext& ctx) {
  const AffineQuadric Y = ternary();
  const IntPolynomial f = monomial_sum(3, {{0, 0, 1}});
  Outcome out;
  out.pass = true;
  out.data = json::array();
  for (std::uint64_t p : {3, 5, 7, 11, 13}) {
    if (!classify_prime(Y, f, p).good) {
      out.pass = false;
      continue;
    }
    std::vector<std::uint64_t> brute, lib;
    for (int e = 1; e <= 3; ++e) {
      brute.push_back(brute_rho_x3(checked_pow(p, e)));
      lib.push_back(static_cast<std::uint64_t>(rho_prime_power(Y, f, p, e, ctx, true)));
    }
    const bool lifts = brute[1] == p * brute[0] && brute[2] == p * brute[1];
    out.pass = out.pass && lifts && brute == lib && brute[0] > 0;
    out.data.push_back(json{{"p", p}, {"brute", brute}, {"library", lib}});
  }
  out.summary = "rho(p^2) = p rho(p) and rho(p^3) = p rho(p^2) by brute force for p in {3, 5, 7, 11, 13}";
  return out;
}

Outcome linear_constraint_envelope(const ParallelContext& ctx) {
  const AffineQuadric Y = ternary();
  const IntPolynomial f = monomial_sum(3, {{2, 0, 0}, {0, 2, 0}});
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<std::int64_t> coord(-20, 20);
  std::vector<IntVec> cs(50);
  for (auto& c : cs) c = {coord(rng), coord(rng), coord(rng)};

  Outcome out;
  out.data = json::array();
  double worst = 0;
  bool agree = true;
  for (std::uint64_t p : {3, 5, 7}) {
    for (int r = 1; r <= 3; ++r) {
      const std::uint64_t q = checked_pow(p, r);
      // x1^2 + x2^2 = 0 forces -2 x3^2 = 1.
      std::vector<std::uint64_t> thirds;
      for (std::uint64_t z = 0; z < q; ++z) {
        if ((2 * z * z + 1) % q == 0) thirds.push_back(z);
      }
      std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
      for (std::uint64_t a = 0; a < q; ++a) {
        for (std::uint64_t b = 0; b < q; ++b) {
          if ((a * a + b * b) % q == 0) pairs.emplace_back(a, b);
        }
      }
      for (const IntVec& c : cs) {
        std::uint64_t brute = 0;
        const std::uint64_t c0 = reduce_mod(c[0], q), c1 = reduce_mod(c[1], q), c2 = reduce_mod(c[2], q);
        for (const auto& [a, b] : pairs) {
          for (std::uint64_t z : thirds) brute += (c0 * a + c1 * b + c2 * z) % q == 0 ? 1 : 0;
        }
        const auto lib = static_cast<std::uint64_t>(rho_linear_constraint(Y, f, q, c, ctx));
        agree = agree && lib == brute;
        std::uint64_t g = q;
        for (auto v : c) g = std::gcd(g, static_cast<std::uint64_t>(std::abs(v)));
        const double ratio = static_cast<double>(brute) /
                             (std::pow(static_cast<double>(p), r / 2.0) * std::pow(static_cast<double>(g), 3));
        worst = std::max(worst, ratio);
        out.data.push_back(json{p, r, c, brute});
      }
    }
  }
  out.pass = agree && worst <= 16;
  out.summary = "library matches brute force on 450 cases; max rho / (p^(r/2) gcd^3) = " + fmt("%.4f", worst) +
                " (bound 16)";
  return out;
}

Outcome convergence(const ParallelContext& ctx) {
  const AffineQuadric Y = diagonal({1, 1, 1, -1}, 1);
  const IntPolynomial f = monomial_sum(4, {{0, 0, 0, 1}});
  const ExperimentReport rep = compare_report(Y, f, 2, {50, 100, 200}, 500, ctx);
  Outcome out;
  std::vector<double> ratios;
  bool finite = true;
  for (const auto& row : rep.rows) {
    finite = finite && row.ratio && std::isfinite(static_cast<double>(*row.ratio)) && *row.ratio > 0;
    ratios.push_back(row.ratio ? static_cast<double>(*row.ratio) : 0.0);
    out.data.push_back(json{{"H", row.H}, {"N", row.N}, {"prediction", static_cast<double>(row.prediction)}});
  }
  bool monotone = finite;
  if (finite) {
    const double last = ratios.back();
    for (std::size_t i = 1; i < ratios.size(); ++i) {
      monotone = monotone && std::fabs(ratios[i] - last) <= std::fabs(ratios[i - 1] - last);
    }
  }
  out.pass = finite && monotone && ratios.back() >= 0.7 && ratios.back() <= 1.4;
  out.summary = "ratios " + fmt("%.4f", ratios[0]) + ", " + fmt("%.4f", ratios[1]) + ", " + fmt("%.4f", ratios[2]) +
                " at H = 50, 100, 200";
  return out;
}

Outcome affine_count_exponent(const ParallelContext& ctx) {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<std::int64_t> coef(-5, 5), small(-3, 3);
  Outcome out;
  out.data = json::array();
  int tested = 0, qualifying = 0, draws = 0;
  double worst = 0;
  bool pass = true;
  while (tested < 30) {
    ++draws;
    QuadraticPolynomial q;
    std::vector<std::tuple<int, int, std::int64_t>> terms;
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) terms.emplace_back(i, j, coef(rng));
    }
    q.quad = QuadraticForm::from_coefficients(3, terms);
    q.linear = {coef(rng), coef(rng), coef(rng)};
    // Put a small integral point on the surface so that counts are not all zero.
    const IntVec x0{small(rng), small(rng), small(rng)};
    q.constant = 0;
    q.constant = -static_cast<std::int64_t>(q.eval(x0));
    const AffineCount probe = count_affine_quadratic(q, 1, ctx);
    if (!probe.hypotheses_hold) continue;
    ++tested;
    std::vector<double> lx, ly;
    std::vector<std::uint64_t> counts;
    for (std::int64_t B : {250, 500, 1000}) {
      const std::uint64_t M = count_affine_quadratic(q, B, ctx).count;
      counts.push_back(M);
      lx.push_back(std::log(static_cast<double>(B)));
      ly.push_back(std::log(static_cast<double>(std::max<std::uint64_t>(M, 1))));
    }
    const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 3; ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    const bool counted = counts.back() >= 10;
    if (counted) {
      ++qualifying;
      worst = std::max(worst, slope);
      pass = pass && slope <= 1.35;
    }
    out.data.push_back(json{{"q", q.to_polynomial().to_string()}, {"M", counts}, {"slope", slope}, {"counted", counted}});
  }
  out.pass = pass && qualifying > 0;
  out.summary = std::to_string(qualifying) + " of 30 polynomials have M(q;1000) >= 10; largest slope " +
                fmt("%.4f", worst) + " (bound 1.35)";
  return out;
}

Outcome archimedean(const ParallelContext& ctx) {
  const AffineQuadric Y = ternary();
  Outcome out;
  out.pass = true;
  double worst = 0;
  for (std::int64_t H : {10, 20}) {
    const auto fiber = real_density_fiber(Y, H, ctx);
    const auto shell = real_density_shell(Y, H, 0.5L, 1'000'000, 17, ctx);
    const double rel = std::fabs(static_cast<double>((fiber.value - shell.value) / fiber.value));
    worst = std::max(worst, rel);
    out.pass = out.pass && rel < 0.01;
    out.data.push_back(json{{"H", H}, {"fiber", static_cast<double>(fiber.value)}, {"shell", static_cast<double>(shell.value)}});
  }
  out.summary = "fiber and shell differ by at most " + fmt("%.3g", 100 * worst) + "% at H = 10, 20";
  return out;
}

Outcome lattice_exactness(const ParallelContext& ctx) {
  struct Case {
    AffineQuadric Y;
    std::int64_t H;
  };
  const std::vector<Case> cases{{ternary(), 100}, {diagonal({1, 1, 1, -1}, 1), 30}};
  Outcome out;
  std::uint64_t lattices = 0, transported = 0, failures = 0;
  json per_case = json::array();
  for (const Case& cs : cases) {
    const AffineQuadric& Y = cs.Y;
    const std::int64_t H = cs.H;
    const int n = Y.n();
    const PointList pts = enumerate_points(Y, H, ctx);
    json moduli = json::array();
    for (std::uint64_t ell = 2; ell <= 30; ++ell) {
      std::uint64_t classes = 0;
      oracle::for_each_residue(n, ell, [&](const std::vector<std::uint64_t>& x) {
        if (oracle::form_mod(Y.form(), x, ell) != reduce_mod(Y.m(), ell)) return;
        ++classes;
        std::uint64_t g = ell;
        for (int i = 0; i < n; ++i) {
          BigInt s = 0;
          for (int k = 0; k < n; ++k) s += BigInt(Y.form().gram(i, k)) * x[static_cast<std::size_t>(k)];
          g = std::gcd(g, reduce_mod(s, ell));
        }
        const auto L = build_congruence_lattice(Y, IntVec(x.begin(), x.end()), ell);
        std::vector<std::int64_t> m(static_cast<std::size_t>(n * n));
        for (int c = 0; c < n; ++c) {
          for (int r = 0; r < n; ++r) m[static_cast<std::size_t>(r * n + c)] = L.basis[c][r];
        }
        BigInt det = oracle::det_laplace(m, n);
        if (det < 0) det = -det;
        if (det != ell / g || L.det != ell / g) ++failures;
      });
      lattices += classes;

      // Transport every congruent point through the derived quadratic of its class.
      std::map<IntVec, std::vector<std::size_t>> by_class;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        IntVec xi(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) xi[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(reduce_mod(pts[i][k], ell));
        by_class[xi].push_back(i);
      }
      for (const auto& [xi, members] : by_class) {
        const auto L = reduce_basis(build_congruence_lattice(Y, xi, ell));
        const auto x0 = pts[members.front()];
        const DerivedQuadratic D = derived_quadratic(Y, x0, L);
        for (std::size_t i : members) {
          const auto lambda = transport(L, x0, pts[i]);
          if (!lambda || D.q.eval(*lambda) != 0) ++failures;
          ++transported;
        }
      }
      moduli.push_back(json{ell, classes, by_class.size()});
    }
    per_case.push_back(json{{"n", n}, {"H", H}, {"points", pts.size()}, {"moduli", moduli}});
  }
  out.data = {{"cases", per_case}, {"failures", failures}};
  out.pass = failures == 0;
  out.summary = std::to_string(lattices) + " lattices with exact determinant, " + std::to_string(transported) +
                " points transported to roots of q, " + std::to_string(failures) + " failures";
  return out;
}

struct Timed {
  Outcome outcome;
  double seconds = 0;
};

Timed run_timed(const Criterion& c, const ParallelContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  Timed t;
  try {
    t.outcome = c(ctx);
  } catch (const std::exception& e) {
    t.outcome.pass = false;
    t.outcome.summary = std::string("threw: ") + e.what();
    t.outcome.data = t.outcome.summary;
  }
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

}  // namespace

int main() {
  struct Entry {
    Criterion run;
    double limit_seconds;
  };
  const std::vector<Entry> criteria{{borovoi_rudnick, 120},           {sieve_identity, 300},
                                    {hensel, 60},                     {linear_constraint_envelope, 180},
                                    {convergence, 1200},              {affine_count_exponent, 600},
                                    {archimedean, 120},               {lattice_exactness, 120}};
  bool all = true;
  std::vector<std::string> serial;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Timed t = run_timed(criteria[i].run, ParallelContext(1));
    const bool pass = t.outcome.pass && t.seconds <= criteria[i].limit_seconds;
    all = all && pass;
    serial.push_back(t.outcome.data.dump());
    std::printf("criterion %zu: %s  %s [%.1fs]\n", i + 1, pass ? "PASS" : "FAIL", t.outcome.summary.c_str(),
                t.seconds);
    std::fflush(stdout);
  }

  std::vector<std::size_t> differing;
  for (unsigned workers : {4u, 8u}) {
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      const Timed t = run_timed(criteria[i].run, ParallelContext(workers));
      if (t.outcome.data.dump() != serial[i]) differing.push_back(i + 1);
    }
  }
  const bool deterministic = differing.empty();
  all = all && deterministic;
  std::string detail = "criteria 1-8 serialize identically at 1, 4 and 8 workers";
  if (!deterministic) {
    detail = "outputs differ for criteria";
    for (auto d : differing) detail += " " + std::to_string(d);
  }
  std::printf("criterion 9: %s  %s\n", deterministic ? "PASS" : "FAIL", detail.c_str());
  return all ? 0 : 1;
}
