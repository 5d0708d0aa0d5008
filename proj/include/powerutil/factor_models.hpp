#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "powerutil/merton_solver.hpp"

namespace powerutil {

struct ConstantFactor {
  double y = 1.0;
};

/// dy = -lambda y dt + dZ with a subordinator Z.
struct OUSubordinator {
  double lambda = 1.0;
  LevyTriplet Z;
  double y0 = 1.0;
};

/// Factor given on a grid; the value at t_k holds on [t_k, t_{k+1}).
struct UserPath {
  std::vector<double> times;
  std::vector<double> values;
};

using FactorProcessSpec = std::variant<ConstantFactor, OUSubordinator, UserPath>;

/// dX = mu(y) dt + sigma(y) dB.
struct GenBS {
  std::function<double(double)> mu;
  std::function<double(double)> sigma;
  FactorProcessSpec factor;
};

/// mu(y) = kappa + delta y, sigma(y) = sqrt(y), y an OU process.
struct BNS {
  double kappa = 0.0;
  double delta = 0.0;
  double lambda = 1.0;
  LevyTriplet Z;
  double y0 = 1.0;
};

/// X = y_- • B.
struct IntegratedLevy {
  LevyTriplet B;
  FactorProcessSpec factor;
};

/// X_t = mu t + B_{∫_0^t y ds} with OU activity y.
struct TimeChangedLevy {
  double mu = 0.0;
  LevyTriplet B;
  double lambda = 1.0;
  LevyTriplet Z;
  double y0 = 1.0;
};

using ModelFamily = std::variant<GenBS, BNS, IntegratedLevy, TimeChangedLevy>;

struct FactorModelSpec {
  ModelFamily family;
  Preferences prefs;
  double S0 = 1.0;
};

/// GenBS with mu(y) = mu0 + mu1 y and sigma^2(y) = var0 + var1 y.
GenBS genbs_affine(double mu0, double mu1, double var0, double var1, FactorProcessSpec factor);

/// Checks the structural invariants (positive y0 and lambda, subordinator
/// drivers, increasing user grids). Throws Error(invalid_argument).
void validate(const FactorModelSpec& model);

/// The factor process driving the model (OU for BNS and time-changed models).
FactorProcessSpec factor_of(const FactorModelSpec& model);

LevyTriplet local_triplet_genBS(double mu, double sigma);
LevyTriplet local_triplet_bns(const BNS& model, double y);

/// Characteristics of y • B for a constant y: jump sizes scale by y.
LevyTriplet local_triplet_integrated_levy(double y, const LevyTriplet& B);

/// Characteristics of mu t + B_{y t}: the jump intensity scales by y.
LevyTriplet local_triplet_time_changed(double mu, const LevyTriplet& B, double y);

/// Local triplet of X given the factor state y.
LevyTriplet local_triplet(const FactorModelSpec& model, double y);

/// pi as a function of the factor state, using closed forms when they exist.
/// For a time-changed model with mu = 0 the returned rule is constant.
std::function<double(double)> fraction_rule(const FactorModelSpec& model,
                                            const SolverOptions& options = {});

struct FractionPath {
  std::vector<double> time;
  std::vector<double> y;
  std::vector<double> pi;
};

/// pi(t_k) from the left limit y(t_k-) = values[k]. Solver errors carry the
/// grid index.
FractionPath optimal_fraction_path(const FactorModelSpec& model, const std::vector<double>& times,
                                   const std::vector<double>& ys,
                                   const SolverOptions& options = {});

/// Warning text when the time-changed model falls outside the sufficient
/// no-arbitrage condition (B with jumps of both signs, or c^B > 0).
std::optional<std::string> nflvr_warning(const FactorModelSpec& model);

struct StrategyPath {
  std::vector<double> shares;  ///< phi_k, held over step k
  std::vector<double> wealth;  ///< V_0 .. V_n
  std::vector<double> price;   ///< S_0 .. S_n
};

/// V_{k+1} = V_k (1 + pi_k dX_k), phi_k = pi_k V_k / S_k, S_{k+1} = S_k (1 + dX_k).
/// Throws Error(bankruptcy_step) when 1 + pi_k dX_k <= 0.
StrategyPath strategy_from_fraction(const std::vector<double>& pi,
                                    const std::vector<double>& dX, double S0, double v);

}  // namespace powerutil
