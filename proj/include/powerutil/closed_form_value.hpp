#pragma once

#include "powerutil/factor_models.hpp"

namespace powerutil {

struct ValueResult {
  bool finite = true;
  double value = 0.0;  ///< meaningful only when finite
  double C = 0.0;
  double explosion_time = kInf;
};

/// C = (p-1) b pi + p(1-p)/2 c pi^2 - ∫ ((1+pi x)^{1-p} - 1 - (1-p) pi h(x)) K(dx),
/// which equals -alpha_B(pi).
double constant_C(const LevyTriplet& B, double pi, double p,
                  const quadrature::Options& options = {});

/// C (e^{-lambda (T-t)} - 1) / lambda; tends to -C (T-t) as lambda -> 0.
double alpha_tilde(double t, double C, double lambda, double T);

/// First horizon at which ∫_1^inf exp((e^{-lambda t} - 1) C z / lambda) K^Z(dz)
/// becomes infinite, decided from the tail metadata of K^Z. +inf when C >= 0
/// or the exponential moments of K^Z never run out.
double explosion_time(const LevyTriplet& Z, double C, double lambda);

/// Whether the value is finite for horizon T. At T = T_inf the tail boundary
/// flag decides: a finite boundary or a logarithmic blow-up keeps the time
/// integral finite, a pole does not.
bool value_finite_at(const LevyTriplet& Z, double C, double lambda, double T);

/// Maximal expected utility of the time-changed model with mu = 0 at the
/// constant fraction pi. Throws Error(not_closed_form) when mu != 0. T = 0 is
/// accepted and gives u(v).
ValueResult value_closed_form(const TimeChangedLevy& model, double pi, const Preferences& prefs,
                              const quadrature::Options& options = {});

/// v^{1-p}/(1-p) exp(log 2 / lambda + |C / (2 lambda)| y0).
double explosion_example_bound(double C, double lambda, double y0, const Preferences& prefs);

/// Utility of wealth x.
double power_utility(double x, double p);

}  // namespace powerutil
