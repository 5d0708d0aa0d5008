#include "powerutil/merton_solver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "powerutil/error.hpp"

namespace powerutil {
namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// (1 + z)^{-p} - 1 with z = pi x, accurate for small z.
double power_minus_one(double z, double exponent) {
  return std::expm1(exponent * std::log1p(z));
}

std::vector<double> pole_of(double pi) {
  if (pi == 0.0) return {};
  return {-1.0 / pi};
}

// Tail growth of (1 + pi x)^{e} x^{extra} as |x| grows.
TailGrowth power_growth(double pi, double exponent, double extra) {
  TailGrowth g;
  const double q = (pi == 0.0 ? 0.0 : exponent) + extra;
  g.positive_power = q;
  g.negative_power = q;
  return g;
}

// True when 1 + pi e = 0 at a support edge e that carries mass, together with
// the order of the mass there.
bool hits_edge(const LevyMeasure& K, double pi, double& order) {
  if (pi == 0.0 || K.is_zero()) return false;
  const SupportBounds s = K.support();
  const MeasureTails t = K.tails();
  if (pi > 0.0 && s.lower < 0.0 && 1.0 + pi * s.lower <= 0.0) {
    order = t.lower_edge_order;
    return true;
  }
  if (pi < 0.0 && s.upper > 0.0 && 1.0 + pi * s.upper <= 0.0) {
    order = t.upper_edge_order;
    return true;
  }
  return false;
}

void require_condition1(const LevyMeasure& K, double pi, const char* op) {
  if (!std::isfinite(pi) || !condition1(K, pi)) {
    throw Error(ErrorCode::out_of_domain,
                std::string(op) + ": pi = " + num(pi) + " violates K({1 + pi x <= 0}) = 0");
  }
}

void require_p(double p, const char* op) {
  require(p > 0.0 && p != 1.0 && std::isfinite(p), ErrorCode::invalid_argument,
          std::string(op) + ": risk aversion must be positive and different from 1");
}

}  // namespace

void validate(const Preferences& prefs) {
  require_p(prefs.p, "Preferences");
  require(prefs.v > 0.0 && std::isfinite(prefs.v), ErrorCode::invalid_argument,
          "Preferences: initial wealth must be positive");
  require(prefs.T > 0.0 && std::isfinite(prefs.T), ErrorCode::invalid_argument,
          "Preferences: horizon must be positive");
}

bool AdmissibleInterval::contains(double pi) const noexcept {
  if (pi < lo || pi > hi) return false;
  if (pi == lo && lo_open) return false;
  if (pi == hi && hi_open) return false;
  return true;
}

AdmissibleInterval admissible_interval(const LevyMeasure& K, double safety_margin) {
  AdmissibleInterval iv;
  const SupportBounds s = K.support();
  if (s.empty) return iv;
  if (s.lower < -1.0 || (s.lower == -1.0 && s.lower_atom)) {
    throw Error(ErrorCode::inadmissible_model,
                "admissible_interval: jump support reaches " + num(s.lower) +
                    ", prices would not stay positive");
  }
  if (s.lower < 0.0) {
    iv.hi = 1.0 / -s.lower;
    iv.hi_open = s.lower_atom;
  }
  if (s.upper > 0.0) {
    iv.lo = -1.0 / s.upper;
    iv.lo_open = s.upper_atom;
  }
  if (safety_margin > 0.0) {
    if (std::isfinite(iv.hi)) iv.hi -= safety_margin * std::max(1.0, std::abs(iv.hi));
    if (std::isfinite(iv.lo)) iv.lo += safety_margin * std::max(1.0, std::abs(iv.lo));
  }
  return iv;
}

bool condition1(const LevyMeasure& K, double pi) {
  return admissible_interval(K).contains(pi);
}

bool condition2(const LevyTriplet& t, double p, double pi) {
  if (!condition1(t.jumps, pi)) return false;
  if (t.jumps.is_zero()) return true;
  const MeasureTails tails = t.jumps.tails();
  const TailGrowth g = power_growth(pi, -p, 1.0);
  if (!tail_moment_finite(tails.positive, 0.0, g.positive_power) ||
      !tail_moment_finite(tails.negative, 0.0, g.negative_power))
    return false;
  double order = 0.0;
  if (hits_edge(t.jumps, pi, order) && !(order > p)) return false;
  return true;
}

bool alpha_integrable(const LevyTriplet& t, double p, double pi) {
  if (!condition1(t.jumps, pi)) return false;
  if (t.jumps.is_zero() || pi == 0.0) return true;
  const MeasureTails tails = t.jumps.tails();
  const TailGrowth g = power_growth(pi, 1.0 - p, 0.0);
  if (!tail_moment_finite(tails.positive, 0.0, g.positive_power) ||
      !tail_moment_finite(tails.negative, 0.0, g.negative_power))
    return false;
  double order = 0.0;
  if (hits_edge(t.jumps, pi, order) && !(order > p - 1.0)) return false;
  return true;
}

double drift_function_g(const LevyTriplet& t, double p, double pi,
                        const quadrature::Options& options) {
  require_p(p, "drift_function_g");
  require_condition1(t.jumps, pi, "drift_function_g");
  if (!condition2(t, p, pi)) {
    throw Error(ErrorCode::divergent,
                "drift_function_g: ∫|x(1+pi x)^{-p} - h(x)| K(dx) is infinite at pi = " + num(pi));
  }
  double jump = 0.0;
  if (!t.jumps.is_zero()) {
    const auto poles = pole_of(pi);
    const Truncation tag = t.truncation;
    jump = integrate_levy(
        t.jumps,
        [=](double x) {
          return x * power_minus_one(pi * x, -p) + (x - truncation(x, tag));
        },
        poles, power_growth(pi, -p, 1.0), options);
  }
  return t.drift - p * t.diffusion * pi + jump;
}

double drift_scale(const LevyTriplet& t, double p, double pi,
                   const quadrature::Options& options) {
  require_p(p, "drift_scale");
  require_condition1(t.jumps, pi, "drift_scale");
  double jump = 0.0;
  if (!t.jumps.is_zero()) {
    if (!condition2(t, p, pi)) return kInf;
    const auto poles = pole_of(pi);
    const Truncation tag = t.truncation;
    jump = integrate_levy(
        t.jumps,
        [=](double x) {
          return std::abs(x * power_minus_one(pi * x, -p) + (x - truncation(x, tag)));
        },
        poles, power_growth(pi, -p, 1.0), options);
  }
  return std::abs(t.drift) + p * t.diffusion * std::abs(pi) + jump;
}

double growth_exponent_alpha(const LevyTriplet& t, double p, double pi,
                             const quadrature::Options& options) {
  require_p(p, "growth_exponent_alpha");
  require_condition1(t.jumps, pi, "growth_exponent_alpha");
  if (pi == 0.0) return 0.0;
  if (!alpha_integrable(t, p, pi)) {
    throw Error(ErrorCode::divergent,
                "growth_exponent_alpha: jump integral is infinite at pi = " + num(pi));
  }
  const double q = 1.0 - p;
  double jump = 0.0;
  if (!t.jumps.is_zero()) {
    const auto poles = pole_of(pi);
    const Truncation tag = t.truncation;
    jump = integrate_levy(
        t.jumps,
        [=](double x) { return power_minus_one(pi * x, q) - q * pi * truncation(x, tag); },
        poles, power_growth(pi, q, 0.0), options);
  }
  return q * pi * t.drift - 0.5 * p * q * pi * pi * t.diffusion + jump;
}

std::string to_string(FractionLocation location) {
  switch (location) {
    case FractionLocation::interior: return "interior";
    case FractionLocation::lower_boundary: return "lower_boundary";
    case FractionLocation::upper_boundary: return "upper_boundary";
    case FractionLocation::degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

struct Bracket {
  double a;   // g(a) > 0
  double ga;
  double b;   // g(b) < 0
  double gb;
};

class Solver {
 public:
  Solver(const LevyTriplet& t, double p, const SolverOptions& o) : t_(t), p_(p), o_(o) {}

  double g(double pi, bool tight = false) const {
    quadrature::Options q;
    q.rel_tol = tight ? o_.tight_quad_tol : o_.quad_tol;
    return drift_function_g(t_, p_, pi, q);
  }

  OptimalFractionResult finish(double pi, FractionLocation location) const {
    quadrature::Options q;
    q.rel_tol = o_.tight_quad_tol;
    OptimalFractionResult r;
    r.pi = pi == 0.0 ? 0.0 : pi;
    r.location = location;
    r.g_residual = drift_function_g(t_, p_, pi, q);
    r.g_scale = drift_scale(t_, p_, pi, q);
    r.alpha_value = growth_exponent_alpha(t_, p_, pi, q);
    return r;
  }

  OptimalFractionResult solve() const {
    if (t_.is_degenerate()) {
      OptimalFractionResult r;
      r.location = FractionLocation::degenerate;
      return r;
    }
    const AdmissibleInterval iv = admissible_interval(t_.jumps);
    const double g0 = g(0.0);
    if (g0 == 0.0) return finish(0.0, FractionLocation::interior);
    Bracket br{};
    if (g0 > 0.0) {
      br.a = 0.0;
      br.ga = g0;
      if (std::isfinite(iv.hi)) {
        if (auto edge = probe_edge(iv.hi, iv.hi_open, -1.0)) {
          if (edge->second >= 0.0) return finish(edge->first, FractionLocation::upper_boundary);
          br.b = edge->first;
          br.gb = edge->second;
        }
      } else {
        expand(br, +1.0);
      }
    } else {
      br.b = 0.0;
      br.gb = g0;
      if (std::isfinite(iv.lo)) {
        if (auto edge = probe_edge(iv.lo, iv.lo_open, +1.0)) {
          if (edge->second <= 0.0) return finish(edge->first, FractionLocation::lower_boundary);
          br.a = edge->first;
          br.ga = edge->second;
        }
      } else {
        expand(br, -1.0);
      }
    }
    return finish(refine(br), FractionLocation::interior);
  }

 private:
  // Evaluates g at the endpoint itself when Condition 2 holds there, and
  // otherwise at points stepping towards it. `inward` is the direction into
  // the interval. Returns the last point probed and g there.
  std::optional<std::pair<double, double>> probe_edge(double end, bool open,
                                                      double inward) const {
    if (!open && condition2(t_, p_, end)) return std::make_pair(end, g(end));
    std::pair<double, double> last{};
    for (double m = o_.safety_margin; m >= 1e-15; m *= 1e-2) {
      const double x = end + inward * m * std::max(1.0, std::abs(end));
      if (!(x != end)) break;
      last = {x, g(x)};
      const bool crossed = inward < 0.0 ? last.second < 0.0 : last.second > 0.0;
      if (crossed) return last;
    }
    return last;
  }

  void expand(Bracket& br, double direction) const {
    double step = 1.0;
    while (step <= o_.max_leverage) {
      const double x = direction * step;
      const double gx = g(x);
      if (direction > 0.0) {
        if (gx <= 0.0) {
          br.b = x;
          br.gb = gx;
          return;
        }
        br.a = x;
        br.ga = gx;
      } else {
        if (gx >= 0.0) {
          br.a = x;
          br.ga = gx;
          return;
        }
        br.b = x;
        br.gb = gx;
      }
      step *= 2.0;
    }
    throw Error(ErrorCode::no_bracket,
                std::string("optimal_fraction: g keeps its sign up to |pi| = ") +
                    num(o_.max_leverage) + (direction > 0.0 ? " on the right" : " on the left") +
                    ", the optimal leverage is unbounded");
  }

  // Illinois false position inside a shrinking bracket, with a bisection
  // step whenever the bracket fails to halve.
  double refine(Bracket br) const {
    if (br.gb == 0.0) return br.b;
    if (br.ga == 0.0) return br.a;
    double fa = br.ga;
    double fb = br.gb;
    int side = 0;
    double best = std::abs(br.ga) < std::abs(br.gb) ? br.a : br.b;
    double best_abs = std::min(std::abs(br.ga), std::abs(br.gb));
    double width_before = br.b - br.a;
    const double scale0 = std::max(drift_scale(t_, p_, best), 1e-300);
    for (int it = 0; it < o_.max_iterations; ++it) {
      const double width = br.b - br.a;
      const double mid = 0.5 * (br.a + br.b);
      if (width < 1e-12 * (1.0 + std::abs(mid))) break;
      const bool tight = width < 1e-6 * (1.0 + std::abs(mid));
      double x = br.b - fb * (br.b - br.a) / (fb - fa);
      if (it % 3 == 2) {
        if (width > 0.5 * width_before) x = mid;
        width_before = width;
      }
      if (!(x > br.a && x < br.b)) x = mid;
      const double gx = g(x, tight);
      if (std::abs(gx) < best_abs) {
        best_abs = std::abs(gx);
        best = x;
      }
      if (gx == 0.0 || std::abs(gx) <= 1e-13 * scale0) return x;
      if (gx > 0.0) {
        br.a = x;
        br.ga = fa = gx;
        if (side == +1) fb *= 0.5;
        side = +1;
      } else {
        br.b = x;
        br.gb = fb = gx;
        if (side == -1) fa *= 0.5;
        side = -1;
      }
    }
    return best;
  }

  const LevyTriplet& t_;
  double p_;
  const SolverOptions& o_;
};

}  // namespace

OptimalFractionResult optimal_fraction(const LevyTriplet& t, double p,
                                       const SolverOptions& options) {
  require_p(p, "optimal_fraction");
  return Solver(t, p, options).solve();
}

ConditionReport verify_conditions(const LevyTriplet& t, double p, double pi, double tolerance) {
  ConditionReport r;
  try {
    r.cond1 = std::isfinite(pi) && condition1(t.jumps, pi);
  } catch (const Error&) {
    r.cond1 = false;
  }
  if (!r.cond1) return r;
  r.cond2 = condition2(t, p, pi);
  if (r.cond2) {
    try {
      quadrature::Options q;
      q.rel_tol = 1e-12;
      const double g = drift_function_g(t, p, pi, q);
      const double scale = drift_scale(t, p, pi, q);
      const AdmissibleInterval iv = admissible_interval(t.jumps);
      double residual = g;
      if (pi == iv.hi && g >= 0.0) residual = 0.0;
      if (pi == iv.lo && g <= 0.0) residual = 0.0;
      r.cond3_residual = residual;
      r.cond3 = std::abs(residual) <= tolerance * std::max(scale, 1e-300) || residual == 0.0;
    } catch (const Error&) {
      r.cond3 = false;
    }
  }
  if (alpha_integrable(t, p, pi)) {
    try {
      r.alpha = growth_exponent_alpha(t, p, pi);
      r.cond4_alpha_finite = std::isfinite(r.alpha);
    } catch (const Error&) {
      r.cond4_alpha_finite = false;
    }
  }
  return r;
}

double perturbation_drift(const LevyTriplet& t, double p, double pi_star, double eta,
                          const quadrature::Options& options) {
  require_p(p, "perturbation_drift");
  require_condition1(t.jumps, pi_star, "perturbation_drift");
  // eta only needs 1 + eta x >= 0 almost everywhere.
  AdmissibleInterval closed = admissible_interval(t.jumps);
  closed.lo_open = closed.hi_open = false;
  if (!std::isfinite(eta) || !closed.contains(eta)) {
    throw Error(ErrorCode::out_of_domain,
                "perturbation_drift: eta = " + num(eta) + " violates 1 + eta x >= 0");
  }
  if (!condition2(t, p, pi_star)) {
    throw Error(ErrorCode::divergent, "perturbation_drift: Condition 2 fails at pi = " +
                                          num(pi_star));
  }
  const double pi = pi_star;
  const double b = t.drift;
  const double c = t.diffusion;
  const double alpha = growth_exponent_alpha(t, p, pi, options);
  double jump = 0.0;
  if (!t.jumps.is_zero()) {
    const auto poles = pole_of(pi);
    const Truncation tag = t.truncation;
    const double lin = eta - p * pi;
    jump = integrate_levy(
        t.jumps,
        [=](double x) {
          // (1 + eta x)(1 + pi x)^{-p} - 1 - (eta - p pi) h(x)
          const double m = power_minus_one(pi * x, -p);
          return (m + p * pi * x) + eta * x * m + lin * (x - truncation(x, tag));
        },
        poles, power_growth(pi, -p, 1.0), options);
  }
  return (eta - p * pi) * b + (0.5 * p * (p + 1.0) * pi * pi - p * pi * eta) * c - alpha + jump;
}

}  // namespace powerutil
