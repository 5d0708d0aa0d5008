#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "powerutil/closed_form_value.hpp"
#include "powerutil/factor_models.hpp"
#include "powerutil/rng.hpp"

namespace powerutil {

struct SimConfig {
  std::int64_t n_paths = 10000;
  int n_steps = 100;
  std::uint64_t seed = 1;
  double small_jump_cutoff = 1e-3;
  bool antithetic = false;
  int workers = 1;
  /// Upper bound on n_paths * n_steps.
  std::int64_t budget = 4'000'000'000;
};

/// Throws Error(invalid_argument).
void validate(const SimConfig& cfg);

struct UtilityEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_effective = 0;
  std::int64_t n_discarded = 0;
  bool reliable = true;  ///< discard rate below kMaxDiscardRate
};

inline constexpr double kMaxDiscardRate = 1e-3;

/// Uniform grid 0 = t_0 < ... < t_n = T.
std::vector<double> time_grid(double T, int n_steps);

/// Sampler for the jumps of a Levy measure. Finite-activity measures are
/// sampled exactly. Infinite-activity measures are cut at eps: jumps above
/// eps are sampled, the mean of the rest becomes a drift. eps is lowered
/// below the requested cutoff when needed so that the discarded variance stays
/// under 1e-6 of the total.
class JumpSampler {
 public:
  JumpSampler() = default;
  JumpSampler(const LevyMeasure& measure, double cutoff);

  /// Intensity of the sampled jumps per unit time.
  double rate() const noexcept { return rate_; }
  /// Mean of the dropped small jumps per unit time.
  double small_jump_drift() const noexcept { return small_drift_; }
  /// Cutoff actually used (0 for finite activity).
  double cutoff() const noexcept { return eps_; }
  double sample(rng::Stream& s) const;

 private:
  LevyMeasure measure_;
  double rate_ = 0.0;
  double small_drift_ = 0.0;
  double eps_ = 0.0;
  double region_split_ = 0.0;
  std::vector<double> cumulative_;
};

/// Increments of the subordinator Z over the grid steps. Compound Poisson
/// jumps are binned into the step they fall in; a Gamma measure is sampled
/// by exact increments.
std::vector<double> simulate_subordinator_increments(const LevyTriplet& Z,
                                                     const std::vector<double>& grid,
                                                     rng::Stream& stream,
                                                     double cutoff = 1e-3);

/// y_{k+1} = y_k e^{-lambda dt} + dZ_k. lambda = 0 is allowed.
std::vector<double> simulate_ou_path(double lambda, double y0, const std::vector<double>& dZ,
                                     const std::vector<double>& grid);

/// Factor values at the grid points and the exact activity ∫ y dt per step.
struct FactorPath {
  std::vector<double> time;
  std::vector<double> y;
  std::vector<double> activity;
};

/// OU paths place compound Poisson jumps at their exact times inside each
/// step, so y at the grid and the activity are exact. Gamma drivers use exact
/// increments applied at step end.
FactorPath simulate_factor(const FactorProcessSpec& factor, const std::vector<double>& grid,
                           rng::Stream& stream, double cutoff = 1e-3);

/// Reusable form of simulate_factor.
class FactorSampler {
 public:
  FactorSampler(const FactorProcessSpec& factor, double cutoff);
  void sample(const std::vector<double>& grid, rng::Stream& stream, FactorPath& out) const;

 private:
  void sample_ou(const OUSubordinator& ou, const std::vector<double>& grid, rng::Stream& st,
                 FactorPath& out) const;

  const FactorProcessSpec* factor_;
  double drift0_ = 0.0;
  bool gamma_ = false;
  JumpSampler jumps_;
};

/// Return increments on a grid, split into a Gaussian part and jumps:
/// over step k, X moves by continuous[k] (mean plus Gaussian noise with
/// variance[k]) and by the jumps jumps[offset[k] .. offset[k+1]).
struct ReturnPath {
  std::vector<double> continuous;
  std::vector<double> variance;
  std::vector<std::size_t> offset{0};
  std::vector<double> jumps;

  std::size_t steps() const noexcept { return continuous.size(); }
  void clear();
  /// E(pi X) over step k: exp(pi dX^c - pi^2 var / 2) prod (1 + pi x_j).
  /// Zero or negative when a jump ruins the position.
  double wealth_factor(std::size_t k, double pi) const;
  /// S_{k+1} / S_k - 1.
  double simple_return(std::size_t k) const { return wealth_factor(k, 1.0) - 1.0; }
};

/// Per-model sampler for return increments given the factor path. GenBS and
/// BNS draw mu(y_k) dt + sigma(y_k) sqrt(dt) N; integrated models draw
/// y_k dB; time-changed models draw mu dt + dB over business time y_k dt.
class ReturnSampler {
 public:
  ReturnSampler(const FactorModelSpec& model, double cutoff);

  void sample(const FactorPath& factor, rng::Stream& diffusion, rng::Stream& jumps,
              bool negate_normals, ReturnPath& out) const;

 private:
  const FactorModelSpec* model_;
  double drift0_ = 0.0;
  double diffusion_ = 0.0;
  JumpSampler jumps_;
};

ReturnPath simulate_return_increments(const FactorModelSpec& model, const FactorPath& factor,
                                      rng::Stream& diffusion, rng::Stream& jumps,
                                      double cutoff = 1e-3);

/// Fraction held as a function of the factor state y_{t-}.
using StrategyRule = std::function<double(double)>;

/// Mean of u(V_T) with V built from the fractions pi(y_k) with exact
/// stochastic exponentials over each step. Paths ruined by a jump are
/// discarded and counted. Throws Error(unreliable) when the discard rate
/// exceeds kMaxDiscardRate.
UtilityEstimate estimate_utility(const FactorModelSpec& model, const StrategyRule& rule,
                                 const SimConfig& cfg);

/// Mean of (V_T / v)^{1-p}.
UtilityEstimate estimate_power_moment(const FactorModelSpec& model, const StrategyRule& rule,
                                      const SimConfig& cfg);

/// Brute-force comparison of a candidate optimum against competitors on
/// common random numbers. With L_T / L_0 = exp(-sum alpha_k dt) built from the
/// candidate, the ratio estimates are normalised by v^{1-p}:
///   supermartingale[j] = E[(L_T/L_0) (V_T(phi)/v)^{-p} V_T(psi_j)/v]
///   martingale         = E[(L_T/L_0) (V_T(phi)/v)^{1-p}].
struct StrategyComparison {
  UtilityEstimate optimal;
  std::vector<UtilityEstimate> competitors;
  std::vector<double> gap;     ///< E u(V(phi)) - E u(V(psi_j)), paired
  std::vector<double> gap_se;
  std::vector<bool> resolved;  ///< gap > 3 gap_se
  std::vector<UtilityEstimate> supermartingale;
  UtilityEstimate martingale;
};

StrategyComparison compare_strategies(const FactorModelSpec& model, const StrategyRule& optimal,
                                      const std::vector<StrategyRule>& competitors,
                                      const SimConfig& cfg);

/// Monte Carlo value of the time-changed model with mu = 0 at the constant
/// fraction pi: v^{1-p}/(1-p) E exp(-C ∫_0^T y dt). Refuses with
/// Error(out_of_domain) when the closed-form value is infinite at T.
UtilityEstimate estimate_value_time_changed(const TimeChangedLevy& model, double pi,
                                            const Preferences& prefs, const SimConfig& cfg);

/// One simulated path with the columns of the path report.
struct SimulatedPath {
  std::vector<double> time;
  std::vector<double> y;
  std::vector<double> pi;
  std::vector<double> S;
  std::vector<double> V;
  std::vector<double> alpha;
  bool ruined = false;
};

SimulatedPath simulate_path(const FactorModelSpec& model, const StrategyRule& rule,
                            const SimConfig& cfg, std::uint32_t path_index = 0);

/// Brute-force optimiser of alpha over a grid: maximises alpha for p < 1 and
/// minimises it for p > 1. The search window is the admissible interval cut
/// to [-window, window]; levels of 1001 points zoom in until the spacing is
/// below `resolution`. A degenerate triplet gives 0.
double grid_oracle_optimal_fraction(const LevyTriplet& t, double p, double resolution = 1e-6,
                                    double window = 50.0);

}  // namespace powerutil
