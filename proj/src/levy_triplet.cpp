#include "powerutil/levy_triplet.hpp"

#include <cmath>

#include "powerutil/error.hpp"

namespace powerutil {
namespace {

double jump_part(const LevyMeasure& k, Truncation tag, double u,
                 const quadrature::Options& options) {
  if (k.is_zero() || u == 0.0) return 0.0;
  if (!exp_moment_finite_two_sided(k, u)) {
    throw Error(ErrorCode::divergent,
                "levy_exponent: exponential moment of order " + std::to_string(u) +
                    " is infinite for the " + k.family() + " measure");
  }
  TailGrowth growth;
  if (u > 0.0) growth.positive_exp = u;
  else growth.negative_exp = -u;
  // e^{ux} - 1 - u h(x) = e^{ux} (-expm1(-ux) - u h(x) e^{-ux})
  return integrate_levy_tilted(
      k,
      [u, tag](double x) {
        const double h = truncation(x, tag);
        return -std::expm1(-u * x) - (h == 0.0 ? 0.0 : u * h * std::exp(-u * x));
      },
      u, {}, growth, options);
}

}  // namespace

LevyTriplet make_triplet(double drift, double diffusion, LevyMeasure jumps, Truncation tag) {
  require(std::isfinite(drift), ErrorCode::invalid_argument, "make_triplet: drift must be finite");
  require(diffusion >= 0.0 && std::isfinite(diffusion), ErrorCode::invalid_argument,
          "make_triplet: diffusion must be nonnegative and finite");
  return LevyTriplet{drift, diffusion, std::move(jumps), tag};
}

double levy_exponent(const LevyTriplet& t, double u, const quadrature::Options& options) {
  return u * t.drift + 0.5 * u * u * t.diffusion + jump_part(t.jumps, t.truncation, u, options);
}

double exp_martingale_defect(const LevyTriplet& t) { return levy_exponent(t, 1.0); }

double martingale_drift(const LevyMeasure& jumps, double diffusion, Truncation tag) {
  return -0.5 * diffusion - jump_part(jumps, tag, 1.0, {});
}

double zero_truncation_drift(const LevyTriplet& t) {
  if (t.truncation == Truncation::zero || t.jumps.is_zero()) return t.drift;
  return t.drift - integrate_levy(t.jumps, [](double x) { return truncation(x); });
}

}  // namespace powerutil
