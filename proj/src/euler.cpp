#include "powerfree/euler.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/trigamma.hpp>

#include "powerfree/arch.hpp"
#include "powerfree/errors.hpp"

namespace powerfree {

SeriesEstimate singular_series(const AffineQuadric& Y, const IntPolynomial& f, int r, std::uint64_t P_max,
                               const ParallelContext& ctx) {
  if (r < 2) throw PreconditionError("singular_series: r must be >= 2");
  if (P_max > 10'000) throw PreconditionError("singular_series: P_max must be <= 10^4");

  const std::vector<std::uint64_t> primes = primes_up_to(P_max);
  const ParallelContext inner = ctx.serial();
  SeriesEstimate out;
  out.P_max = P_max;
  out.conditionally_convergent = Y.n() == 3;
  out.factors = ctx.map<SeriesFactor>(primes.size(), [&](std::size_t i) {
    const std::uint64_t p = primes[i];
    SeriesFactor factor;
    factor.p = p;
    factor.good = classify_prime(Y, f, p).good;
    const LocalDensityValue d = padic_density_f(Y, f, r, p, inner);
    factor.density = d.value;
    factor.status = d.status;
    factor.point_density = padic_point_density(Y, p, inner).value;
    return factor;
  });

  ExactRational product(1);
  for (const SeriesFactor& factor : out.factors) {
    product *= factor.density;
    if (factor.status == DensityStatus::capped) out.exact = false;
    if (factor.density.is_zero() && !out.zero_at) out.zero_at = factor.p;
    if (factor.good && !factor.point_density.is_zero()) {
      const Real80 ratio = (factor.density / factor.point_density).to_real80();
      const long double dev = static_cast<long double>(abs(ratio - 1)) * factor.p * factor.p;
      out.C_meas = std::max(out.C_meas, dev);
    }
  }
  out.partial = product;
  out.partial_real = product.to_real80();
  out.tail_log_bound = out.C_meas * boost::math::trigamma(static_cast<long double>(P_max) + 1);
  out.positive = product.sign() > 0 && out.tail_log_bound < std::numbers::ln2_v<long double>;
  return out;
}

ExactRational congruence_sum_S(const AffineQuadric& Y, const IntPolynomial& f, int r, std::uint64_t K,
                               std::uint64_t P, const ParallelContext& ctx) {
  if (K < 1) throw PreconditionError("congruence_sum_S: K must be >= 1");
  if (r < 2) throw PreconditionError("congruence_sum_S: r must be >= 2");
  const std::vector<std::uint64_t> primes = primes_up_to(P);
  const ParallelContext inner = ctx.serial();
  struct Local {
    ExactRational A, M;
  };
  const auto local = ctx.map<Local>(primes.size(), [&](std::size_t i) {
    return Local{padic_point_density(Y, primes[i], inner).value,
                 padic_density_divisible(Y, f, r, primes[i], inner).value};
  });

  // Square-free P-smooth k <= K, visited depth-first over the prime list.
  ExactRational sum;
  std::vector<bool> divides(primes.size(), false);
  auto visit = [&](auto&& self, std::size_t start, std::uint64_t k, int sign) -> void {
    ctx.poll();
    ExactRational term(sign);
    for (std::size_t i = 0; i < primes.size(); ++i) term *= divides[i] ? local[i].M : local[i].A;
    sum += term;
    for (std::size_t i = start; i < primes.size(); ++i) {
      if (primes[i] > K / k) break;
      divides[i] = true;
      self(self, i + 1, k * primes[i], -sign);
      divides[i] = false;
    }
  };
  visit(visit, 0, 1, 1);
  return sum;
}

long double predicted_main_term(const SeriesEstimate& series, const AffineQuadric& Y, std::int64_t H,
                                const ParallelContext& ctx) {
  if (series.partial.is_zero() || H == 0) return 0;
  const long double mu = real_density_fiber(Y, H, ctx).value;
  return static_cast<long double>(series.partial_real) * mu;
}

long double predicted_main_term(const AffineQuadric& Y, const IntPolynomial& f, int r, std::int64_t H,
                                std::uint64_t P_max, const ParallelContext& ctx) {
  return predicted_main_term(singular_series(Y, f, r, P_max, ctx), Y, H, ctx);
}

}  // namespace powerfree
