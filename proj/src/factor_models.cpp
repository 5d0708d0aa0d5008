#include "powerutil/factor_models.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "powerutil/error.hpp"

namespace powerutil {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate_subordinator(const LevyTriplet& Z, const char* what) {
  const std::string op = std::string("validate: ") + what;
  require(Z.diffusion == 0.0, ErrorCode::invalid_argument, op + " must have no diffusion");
  const SupportBounds s = Z.jumps.support();
  require(s.empty || s.lower >= 0.0, ErrorCode::invalid_argument,
          op + " must have nonnegative jumps");
  require(zero_truncation_drift(Z) >= -1e-12, ErrorCode::invalid_argument,
          op + " must have nonnegative drift");
}

void validate_ou(double lambda, const LevyTriplet& Z, double y0, const char* what) {
  require(lambda > 0.0 && std::isfinite(lambda), ErrorCode::invalid_argument,
          std::string("validate: ") + what + " lambda must be positive");
  require(y0 > 0.0 && std::isfinite(y0), ErrorCode::invalid_argument,
          std::string("validate: ") + what + " y0 must be positive");
  validate_subordinator(Z, what);
}

void validate_factor(const FactorProcessSpec& f) {
  std::visit(Overloaded{
                 [](const ConstantFactor& c) {
                   require(std::isfinite(c.y), ErrorCode::invalid_argument,
                           "validate: constant factor must be finite");
                 },
                 [](const OUSubordinator& o) { validate_ou(o.lambda, o.Z, o.y0, "OU factor"); },
                 [](const UserPath& u) {
                   require(!u.times.empty() && u.times.size() == u.values.size(),
                           ErrorCode::invalid_argument,
                           "validate: user path needs matching, nonempty times and values");
                   for (std::size_t k = 1; k < u.times.size(); ++k) {
                     require(u.times[k] > u.times[k - 1], ErrorCode::invalid_argument,
                             "validate: user path times must be strictly increasing");
                   }
                 },
             },
             f);
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

GenBS genbs_affine(double mu0, double mu1, double var0, double var1, FactorProcessSpec factor) {
  GenBS m;
  m.mu = [=](double y) { return mu0 + mu1 * y; };
  m.sigma = [=](double y) {
    const double v = var0 + var1 * y;
    if (!(v > 0.0)) {
      throw Error(ErrorCode::out_of_domain,
                  "GenBS: sigma^2(y) = " + num(v) + " is not positive at y = " + num(y));
    }
    return std::sqrt(v);
  };
  m.factor = std::move(factor);
  return m;
}

void validate(const FactorModelSpec& model) {
  validate(model.prefs);
  require(model.S0 > 0.0 && std::isfinite(model.S0), ErrorCode::invalid_argument,
          "validate: S0 must be positive");
  std::visit(Overloaded{
                 [](const GenBS& m) {
                   require(static_cast<bool>(m.mu) && static_cast<bool>(m.sigma),
                           ErrorCode::invalid_argument, "validate: GenBS needs mu and sigma");
                   validate_factor(m.factor);
                 },
                 [](const BNS& m) { validate_ou(m.lambda, m.Z, m.y0, "BNS"); },
                 [](const IntegratedLevy& m) { validate_factor(m.factor); },
                 [](const TimeChangedLevy& m) {
                   validate_ou(m.lambda, m.Z, m.y0, "time-changed model");
                   require(std::isfinite(m.mu), ErrorCode::invalid_argument,
                           "validate: mu must be finite");
                 },
             },
             model.family);
}

FactorProcessSpec factor_of(const FactorModelSpec& model) {
  return std::visit(Overloaded{
                        [](const GenBS& m) { return m.factor; },
                        [](const BNS& m) -> FactorProcessSpec {
                          return OUSubordinator{m.lambda, m.Z, m.y0};
                        },
                        [](const IntegratedLevy& m) { return m.factor; },
                        [](const TimeChangedLevy& m) -> FactorProcessSpec {
                          return OUSubordinator{m.lambda, m.Z, m.y0};
                        },
                    },
                    model.family);
}

LevyTriplet local_triplet_genBS(double mu, double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::invalid_argument,
          "local_triplet_genBS: sigma must be positive");
  return make_triplet(mu, sigma * sigma);
}

LevyTriplet local_triplet_bns(const BNS& model, double y) {
  require(y > 0.0, ErrorCode::out_of_domain, "local_triplet_bns: y must be positive");
  return local_triplet_genBS(model.kappa + model.delta * y, std::sqrt(y));
}

LevyTriplet local_triplet_integrated_levy(double y, const LevyTriplet& B) {
  require(std::isfinite(y), ErrorCode::invalid_argument,
          "local_triplet_integrated_levy: y must be finite");
  if (y == 0.0) return {};
  if (y == 1.0 && B.truncation == Truncation::standard) return B;
  double correction = 0.0;
  if (!B.jumps.is_zero()) {
    const Truncation tag = B.truncation;
    const std::array<double, 2> kinks{1.0 / y, -1.0 / y};
    correction = integrate_levy(
        B.jumps, [=](double x) { return truncation(y * x) - y * truncation(x, tag); }, kinks);
  }
  LevyTriplet t = make_triplet(y * B.drift + correction, y * y * B.diffusion, B.jumps.scaled(y));
  try {
    admissible_interval(t.jumps);
  } catch (const Error& e) {
    throw Error(ErrorCode::inadmissible_model,
                "local_triplet_integrated_levy: y = " + num(y) + " gives " + e.what());
  }
  return t;
}

LevyTriplet local_triplet_time_changed(double mu, const LevyTriplet& B, double y) {
  require(y > 0.0 && std::isfinite(y), ErrorCode::invalid_argument,
          "local_triplet_time_changed: y must be positive");
  return make_triplet(mu + B.drift * y, B.diffusion * y, B.jumps.mass_scaled(y), B.truncation);
}

LevyTriplet local_triplet(const FactorModelSpec& model, double y) {
  return std::visit(Overloaded{
                        [y](const GenBS& m) { return local_triplet_genBS(m.mu(y), m.sigma(y)); },
                        [y](const BNS& m) { return local_triplet_bns(m, y); },
                        [y](const IntegratedLevy& m) {
                          return local_triplet_integrated_levy(y, m.B);
                        },
                        [y](const TimeChangedLevy& m) {
                          return local_triplet_time_changed(m.mu, m.B, y);
                        },
                    },
                    model.family);
}

std::function<double(double)> fraction_rule(const FactorModelSpec& model,
                                            const SolverOptions& options) {
  const double p = model.prefs.p;
  return std::visit(
      Overloaded{
          [p](const GenBS& m) -> std::function<double(double)> {
            return [p, m](double y) {
              const double s = m.sigma(y);
              return m.mu(y) / (p * s * s);
            };
          },
          [p](const BNS& m) -> std::function<double(double)> {
            return [p, k = m.kappa, d = m.delta](double y) { return k / (p * y) + d / p; };
          },
          [p, &options](const IntegratedLevy& m) -> std::function<double(double)> {
            // y • B has g_X(pi) = y g_B(pi y), hence pi_X = pi_B / y.
            const double base = optimal_fraction(m.B, p, options).pi;
            return [base](double y) { return y == 0.0 ? 0.0 : base / y; };
          },
          [p, &options](const TimeChangedLevy& m) -> std::function<double(double)> {
            if (m.mu == 0.0) {
              const double pi = optimal_fraction(m.B, p, options).pi;
              return [pi](double) { return pi; };
            }
            return [p, m, options](double y) {
              return optimal_fraction(local_triplet_time_changed(m.mu, m.B, y), p, options).pi;
            };
          },
      },
      model.family);
}

FractionPath optimal_fraction_path(const FactorModelSpec& model, const std::vector<double>& times,
                                   const std::vector<double>& ys, const SolverOptions& options) {
  require(times.size() == ys.size(), ErrorCode::invalid_argument,
          "optimal_fraction_path: times and factor values differ in length");
  const double p = model.prefs.p;
  FractionPath out{times, ys, std::vector<double>(ys.size())};
  std::optional<double> constant;
  if (const auto* tc = std::get_if<TimeChangedLevy>(&model.family); tc && tc->mu == 0.0) {
    try {
      constant = optimal_fraction(tc->B, p, options).pi;
    } catch (const Error& e) {
      throw Error(e.code(), std::string("optimal_fraction_path: ") + e.what());
    }
  }
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const double y = ys[k];
    try {
      if (constant) {
        out.pi[k] = *constant;
        continue;
      }
      out.pi[k] = std::visit(
          Overloaded{
              [&](const GenBS& m) {
                const double s = m.sigma(y);
                return m.mu(y) / (p * s * s);
              },
              [&](const BNS& m) {
                require(y > 0.0, ErrorCode::out_of_domain, "BNS: y must be positive");
                return m.kappa / (p * y) + m.delta / p;
              },
              [&](const auto&) { return optimal_fraction(local_triplet(model, y), p, options).pi; },
          },
          model.family);
    } catch (const Error& e) {
      throw Error(e.code(), "optimal_fraction_path: grid index " + std::to_string(k) + " (y = " +
                                num(y) + "): " + e.what());
    }
  }
  return out;
}

std::optional<std::string> nflvr_warning(const FactorModelSpec& model) {
  const auto* tc = std::get_if<TimeChangedLevy>(&model.family);
  if (!tc) return std::nullopt;
  if (tc->B.diffusion > 0.0) return std::nullopt;
  const SupportBounds s = tc->B.jumps.support();
  if (!s.empty && s.lower < 0.0 && s.upper > 0.0) return std::nullopt;
  return std::string(
      "B has no diffusion and lacks jumps of both signs; absence of arbitrage is not ensured");
}

StrategyPath strategy_from_fraction(const std::vector<double>& pi,
                                    const std::vector<double>& dX, double S0, double v) {
  require(pi.size() == dX.size(), ErrorCode::invalid_argument,
          "strategy_from_fraction: fraction and increment paths differ in length");
  const std::size_t n = dX.size();
  StrategyPath out;
  out.shares.resize(n);
  out.wealth.resize(n + 1);
  out.price.resize(n + 1);
  out.wealth[0] = v;
  out.price[0] = S0;
  for (std::size_t k = 0; k < n; ++k) {
    const double growth = 1.0 + pi[k] * dX[k];
    if (!(growth > 0.0)) {
      throw Error(ErrorCode::bankruptcy_step, "strategy_from_fraction: 1 + pi dX = " +
                                                  num(growth) + " at step " + std::to_string(k));
    }
    out.shares[k] = pi[k] * out.wealth[k] / out.price[k];
    out.wealth[k + 1] = out.wealth[k] * growth;
    out.price[k + 1] = out.price[k] * (1.0 + dX[k]);
  }
  return out;
}

}  // namespace powerutil
