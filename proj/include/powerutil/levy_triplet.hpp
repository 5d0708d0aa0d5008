#pragma once

#include "powerutil/levy_measure.hpp"

namespace powerutil {

/// Truncation function the drift of a triplet is quoted against.
///   standard: h(x) = x 1{|x| <= 1}
///   zero:     h(x) = 0, only meaningful when K integrates |x| near zero.
enum class Truncation { standard, zero };

inline double truncation(double x, Truncation tag = Truncation::standard) noexcept {
  if (tag == Truncation::zero) return 0.0;
  return (x >= -1.0 && x <= 1.0) ? x : 0.0;
}

/// Local characteristics (b, c, K) per unit time.
struct LevyTriplet {
  double drift = 0.0;
  double diffusion = 0.0;
  LevyMeasure jumps;
  Truncation truncation = Truncation::standard;

  bool is_degenerate() const noexcept {
    return drift == 0.0 && diffusion == 0.0 && jumps.is_zero();
  }
};

/// Builds a triplet and checks c >= 0 and finiteness.
LevyTriplet make_triplet(double drift, double diffusion, LevyMeasure jumps = {},
                         Truncation tag = Truncation::standard);

/// psi(u) = u b + u^2 c / 2 + ∫ (e^{ux} - 1 - u h(x)) K(dx).
/// Throws Error(divergent) when the exponential moment of order u is infinite.
double levy_exponent(const LevyTriplet& t, double u,
                     const quadrature::Options& options = {});

/// psi(1); zero iff exp of the process is a martingale.
double exp_martingale_defect(const LevyTriplet& t);

/// Drift making exp of the process a martingale: -c/2 - ∫ (e^x - 1 - h) K.
double martingale_drift(const LevyMeasure& jumps, double diffusion,
                        Truncation tag = Truncation::standard);

/// Drift relative to h = 0, b - ∫ h K. Needs ∫ |x| K < inf near zero.
double zero_truncation_drift(const LevyTriplet& t);

}  // namespace powerutil
