#pragma once

// Real densities mu_inf(Y; H) = lim (1/eps) vol{|x| <= H : |Q(x) - m| < eps/2}.

#include <cstdint>
#include <optional>
#include <string>

#include "powerfree/forms.hpp"
#include "powerfree/parallel.hpp"

namespace powerfree {

struct RealDensityEstimate {
  long double value = 0;
  std::string method;  // "fiber" or "shell"
  long double error = 0;
  std::int64_t H = 0;
  std::optional<int> component;
  std::uint64_t samples = 0;  // shell only
};

/// Leray integral: over the box in the other n - 1 coordinates, sum 1/|dQ/dx_p|
/// over the real roots x_p in [-H, H] of Q = m, where x_p is a pivot coordinate
/// with nonzero diagonal coefficient. The innermost coordinate is integrated
/// in closed form; the remaining ones by adaptive quadrature, split where the
/// integrand is not smooth. With `component`, only roots on that real
/// component (see AffineQuadric::component_of) are counted.
RealDensityEstimate real_density_fiber(const AffineQuadric& Y, std::int64_t H, const ParallelContext& ctx = {},
                                       std::optional<int> component = std::nullopt);

/// real_density_fiber restricted to one real component.
RealDensityEstimate real_density_component(const AffineQuadric& Y, std::int64_t H, int component,
                                           const ParallelContext& ctx = {});

/// Monte Carlo estimate of the shell volume over eps, extrapolated from eps
/// and eps/2. The n - 1 non-pivot coordinates are sampled uniformly; the shell
/// length along the pivot coordinate is computed exactly for each sample. The
/// stream is split into fixed batches seeded from (seed, batch index), so the
/// result does not depend on the worker count.
RealDensityEstimate real_density_shell(const AffineQuadric& Y, std::int64_t H, long double eps,
                                       std::uint64_t samples, std::uint64_t seed, const ParallelContext& ctx = {});

/// Index of the coordinate solved for in both methods.
int pivot_coordinate(const QuadraticForm& Q);

}  // namespace powerfree
