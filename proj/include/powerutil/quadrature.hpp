#pragma once

#include <functional>
#include <span>

namespace powerutil::quadrature {

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_panels = 4000;
  // Length scales of the maps x = a + s*t/(1-t) used on semi-infinite ends.
  double lower_tail_scale = 1.0;
  double upper_tail_scale = 1.0;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

/// Globally adaptive 21-point Gauss-Kronrod integration over the union of
/// the panels delimited by `breakpoints` (sorted, at least two entries; the
/// first and last may be infinite). The integrand is never evaluated at a
/// breakpoint, so integrable endpoint singularities and kinks there are
/// harmless. Throws Error(quadrature_failure) if the tolerance cannot be met
/// within `max_panels` or the integrand returns a non-finite value.
Result integrate(const std::function<double(double)>& f,
                 std::span<const double> breakpoints, const Options& options = {});

/// Convenience overload for a single interval [a, b].
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& options = {});

}  // namespace powerutil::quadrature
