#pragma once

#include <string>

#include "powerutil/levy_triplet.hpp"

namespace powerutil {

/// Power utility u(x) = x^{1-p} / (1-p) with initial wealth v over [0, T].
struct Preferences {
  double p = 2.0;
  double v = 1.0;
  double T = 1.0;
};

void validate(const Preferences& prefs);

/// Set of fractions pi with K({1 + pi x <= 0}) = 0. An endpoint is open when
/// an atom sits at the corresponding support edge.
struct AdmissibleInterval {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = true;
  bool hi_open = true;

  bool contains(double pi) const noexcept;
};

/// Throws Error(inadmissible_model) when K charges (-inf, -1].
/// A positive margin pulls finite endpoints inward by margin * max(1, |end|).
AdmissibleInterval admissible_interval(const LevyMeasure& K, double safety_margin = 0.0);

/// Condition 1 at pi.
bool condition1(const LevyMeasure& K, double pi);
/// ∫ |x (1 + pi x)^{-p} - h(x)| K(dx) < inf, decided from the tail metadata.
bool condition2(const LevyTriplet& t, double p, double pi);
/// The jump integral of the growth exponent is finite at pi.
bool alpha_integrable(const LevyTriplet& t, double p, double pi);

/// g(pi) = b - p c pi + ∫ (x (1 + pi x)^{-p} - h(x)) K(dx).
double drift_function_g(const LevyTriplet& t, double p, double pi,
                        const quadrature::Options& options = {});

/// |b| + p c |pi| + ∫ |x (1 + pi x)^{-p} - h(x)| K(dx); the yardstick for
/// residuals of g.
double drift_scale(const LevyTriplet& t, double p, double pi,
                   const quadrature::Options& options = {});

/// alpha(pi) = (1-p) pi b - p(1-p)/2 pi^2 c
///             + ∫ ((1 + pi x)^{1-p} - 1 - (1-p) pi h(x)) K(dx).
double growth_exponent_alpha(const LevyTriplet& t, double p, double pi,
                             const quadrature::Options& options = {});

enum class FractionLocation { interior, lower_boundary, upper_boundary, degenerate };

std::string to_string(FractionLocation location);

struct OptimalFractionResult {
  double pi = 0.0;
  FractionLocation location = FractionLocation::interior;
  double g_residual = 0.0;
  double alpha_value = 0.0;
  double g_scale = 0.0;
};

struct SolverOptions {
  double safety_margin = 1e-9;
  double quad_tol = 1e-10;
  double tight_quad_tol = 1e-12;
  double max_leverage = 1e8;
  int max_iterations = 300;
};

/// Unique maximiser of the pointwise problem: the root of the decreasing
/// function g, or the endpoint of the admissible interval where g keeps the
/// sign that Condition 3 demands.
/// Errors: inadmissible_model, no_bracket (g has one sign on an unbounded side).
OptimalFractionResult optimal_fraction(const LevyTriplet& t, double p,
                                       const SolverOptions& options = {});

struct ConditionReport {
  bool cond1 = false;
  bool cond2 = false;
  bool cond3 = false;
  double cond3_residual = 0.0;
  bool cond4_alpha_finite = false;
  double alpha = 0.0;

  bool all_pass() const noexcept { return cond1 && cond2 && cond3 && cond4_alpha_finite; }
};

/// Diagnostics for a candidate pi. Failures are reported, never thrown.
/// cond3_residual is the part of g(pi) that violates Condition 3: g itself
/// in the interior, zero at an endpoint where g has the admissible sign.
ConditionReport verify_conditions(const LevyTriplet& t, double p, double pi,
                                  double tolerance = 1e-9);

/// Drift rate of the weighted ratio exp(-∫alpha) V(pi)^{-p} V(eta), each
/// normalised by its initial value, evaluated from its own integral. It equals
/// (eta - pi) g(pi), so it is <= 0 for every admissible eta when pi is optimal.
/// Errors: out_of_domain when eta or pi break Condition 1.
double perturbation_drift(const LevyTriplet& t, double p, double pi_star, double eta,
                          const quadrature::Options& options = {});

}  // namespace powerutil
