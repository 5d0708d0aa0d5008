#include "powerutil/closed_form_value.hpp"

#include <cmath>
#include <numbers>

#include "powerutil/error.hpp"

namespace powerutil {

double power_utility(double x, double p) { return std::pow(x, 1.0 - p) / (1.0 - p); }

double constant_C(const LevyTriplet& B, double pi, double p, const quadrature::Options& options) {
  require(p > 0.0 && p != 1.0, ErrorCode::invalid_argument,
          "constant_C: risk aversion must be positive and different from 1");
  if (!condition1(B.jumps, pi)) {
    throw Error(ErrorCode::out_of_domain, "constant_C: pi violates K({1 + pi x <= 0}) = 0");
  }
  if (pi == 0.0) return 0.0;
  if (!alpha_integrable(B, p, pi)) {
    throw Error(ErrorCode::divergent, "constant_C: jump integral is infinite");
  }
  const double q = 1.0 - p;
  double jump = 0.0;
  if (!B.jumps.is_zero()) {
    const Truncation tag = B.truncation;
    const double pole[] = {-1.0 / pi};
    TailGrowth growth;
    growth.positive_power = growth.negative_power = q;
    jump = integrate_levy(
        B.jumps,
        [=](double x) {
          const double z = pi * x;
          return std::expm1(q * std::log1p(z)) - q * pi * truncation(x, tag);
        },
        pole, growth, options);
  }
  return (p - 1.0) * B.drift * pi + 0.5 * p * q * B.diffusion * pi * pi - jump;
}

double alpha_tilde(double t, double C, double lambda, double T) {
  if (C == 0.0) return 0.0;
  const double tau = T - t;
  if (lambda == 0.0) return -C * tau;
  return C * std::expm1(-lambda * tau) / lambda;
}

double explosion_time(const LevyTriplet& Z, double C, double lambda) {
  require(lambda > 0.0, ErrorCode::invalid_argument, "explosion_time: lambda must be positive");
  if (C >= 0.0 || Z.jumps.is_zero()) return kInf;
  const double theta = Z.jumps.tails().positive.exp_rate;
  if (!std::isfinite(theta)) return kInf;
  const double ratio = lambda * theta / -C;
  if (ratio >= 1.0) return kInf;
  return -std::log1p(-ratio) / lambda;
}

bool value_finite_at(const LevyTriplet& Z, double C, double lambda, double T) {
  const double t_inf = explosion_time(Z, C, lambda);
  if (T < t_inf) return true;
  if (T > t_inf) return false;
  return Z.jumps.tails().positive.at_rate != TailBoundary::pole;
}

ValueResult value_closed_form(const TimeChangedLevy& model, double pi, const Preferences& prefs,
                              const quadrature::Options& options) {
  if (model.mu != 0.0) {
    throw Error(ErrorCode::not_closed_form,
                "value_closed_form: the closed form needs mu = 0");
  }
  require(prefs.p > 0.0 && prefs.p != 1.0 && prefs.v > 0.0 && prefs.T >= 0.0,
          ErrorCode::invalid_argument, "value_closed_form: invalid preferences");
  require(model.lambda > 0.0, ErrorCode::invalid_argument,
          "value_closed_form: lambda must be positive");
  const double p = prefs.p;
  const double T = prefs.T;
  ValueResult r;
  r.C = constant_C(model.B, pi, p, options);
  r.explosion_time = explosion_time(model.Z, r.C, model.lambda);
  const double u0 = power_utility(prefs.v, p);
  if (T == 0.0 || r.C == 0.0) {
    r.value = u0;
    return r;
  }
  if (p < 1.0 && !value_finite_at(model.Z, r.C, model.lambda, T)) {
    r.finite = false;
    r.value = kInf;
    return r;
  }
  const double C = r.C;
  const double lambda = model.lambda;
  const double theta = model.Z.jumps.tails().positive.exp_rate;
  auto psi_z = [&](double s) {
    double a = alpha_tilde(s, C, lambda, T);
    // At T = T_inf the largest exponent sits on the moment boundary.
    if (a > theta && a < theta * (1.0 + 1e-12)) a = theta;
    return levy_exponent(model.Z, a, options);
  };
  const double time_part = quadrature::integrate(psi_z, 0.0, T, options).value;
  r.value = u0 * std::exp(time_part + alpha_tilde(0.0, C, lambda, T) * model.y0);
  return r;
}

double explosion_example_bound(double C, double lambda, double y0, const Preferences& prefs) {
  return power_utility(prefs.v, prefs.p) *
         std::exp(std::numbers::ln2 / lambda + std::abs(C / (2.0 * lambda)) * y0);
}

}  // namespace powerutil
