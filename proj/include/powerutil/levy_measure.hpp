#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "powerutil/quadrature.hpp"

namespace powerutil {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// How a parametric jump law is attached to the jump size x.
///   additive: the density describes x itself.
///   log:      the density describes log(1 + x), so x = e^Y - 1 > -1. This is
///             the multiplicative convention where the price jumps by e^Y.
enum class JumpScale { additive, log };

struct Atom {
  double location;
  double weight;
};

struct ZeroMeasure {};

struct AtomicMeasure {
  std::vector<Atom> atoms;
};

/// Double-exponential jumps: intensity * (p_up * eta_up e^{-eta_up u} on u > 0,
/// (1 - p_up) * eta_down e^{eta_down u} on u < 0).
struct KouMeasure {
  double intensity;
  double p_up;
  double eta_up;
  double eta_down;
  JumpScale scale = JumpScale::additive;
};

/// Gaussian jumps with total intensity `intensity`.
struct NormalJumpMeasure {
  double intensity;
  double mean;
  double stddev;
  JumpScale scale = JumpScale::additive;
};

/// Gamma subordinator: shape * e^{-rate z} / z on z > 0.
struct GammaMeasure {
  double shape;
  double rate;
};

/// Compound Poisson subordinator with exponential jump sizes:
/// intensity * jump_rate * e^{-jump_rate z} on z > 0.
struct CompoundPoissonExpMeasure {
  double intensity;
  double jump_rate;
};

/// 1_{z > 1} exp(C z / (2 lambda)) / z^2 with C < 0. Its exponential moment
/// of order |C| / (2 lambda) is still finite because of the z^-2 factor.
struct ExplosionMeasure {
  double C;
  double lambda;
};

/// Behaviour of the tail integral of e^{u|x|} exactly at u = exp_rate.
///   finite:        the integral converges at the boundary.
///   log_divergent: diverges like -log(rate - u) as u increases to the rate.
///   pole:          diverges like 1/(rate - u).
enum class TailBoundary { finite, log_divergent, pole };

/// Integrability of one tail {x > 1} or {x < -1}.
struct TailSide {
  double exp_rate = kInf;  ///< int e^{u|x|} K(dx) < inf iff u < exp_rate
  TailBoundary at_rate = TailBoundary::finite;
  double power_index = kInf;  ///< int |x|^q K(dx) < inf iff q < power_index
};

/// Essential support [lower, upper]. The *_atom flags mark an atom sitting
/// exactly at a finite endpoint.
struct SupportBounds {
  double lower = 0.0;
  double upper = 0.0;
  bool empty = true;
  bool lower_atom = false;
  bool upper_atom = false;
};

struct MeasureTails {
  TailSide positive;
  TailSide negative;
  /// Near a finite support endpoint e the mass behaves like
  /// K({x : |x - e| < r}) ~ r^order. Zero means an atom sits at e.
  double lower_edge_order = kInf;
  double upper_edge_order = kInf;
  /// Infimum of q such that K integrates |x|^q near 0.
  double small_jump_order = 0.0;
  bool finite_activity = true;
};

/// Declared growth of an integrand along the tails of the measure:
/// |f(x)| = O(e^{a x} x^q) as x -> +inf and likewise for x -> -inf with |x|.
struct TailGrowth {
  double positive_exp = 0.0;
  double negative_exp = 0.0;
  double positive_power = 0.0;
  double negative_power = 0.0;
};

/// Parametric Levy measure on R. The variant is held together with two
/// generic transformations that are applied on top of it: a size scale s
/// (the image measure under x -> s x) and a mass scale w (the measure w K).
/// Families that are closed under these transformations absorb them into
/// their parameters, which keeps their tail metadata exact.
class LevyMeasure {
 public:
  using Kind = std::variant<ZeroMeasure, AtomicMeasure, KouMeasure, NormalJumpMeasure,
                            GammaMeasure, CompoundPoissonExpMeasure, ExplosionMeasure>;

  LevyMeasure() = default;
  explicit LevyMeasure(Kind kind);

  static LevyMeasure zero() { return {}; }
  static LevyMeasure atoms(std::vector<Atom> atoms);
  static LevyMeasure kou(double intensity, double p_up, double eta_up, double eta_down,
                         JumpScale scale = JumpScale::additive);
  static LevyMeasure normal(double intensity, double mean, double stddev,
                            JumpScale scale = JumpScale::additive);
  static LevyMeasure gamma(double shape, double rate);
  static LevyMeasure compound_poisson_exp(double intensity, double jump_rate);
  static LevyMeasure explosion(double C, double lambda);

  const Kind& kind() const noexcept { return kind_; }
  double size_scale() const noexcept { return size_scale_; }
  double mass_scale() const noexcept { return mass_scale_; }
  bool is_zero() const noexcept { return std::holds_alternative<ZeroMeasure>(kind_); }

  /// Short family name used in configs and reports ("kou", "atoms", ...).
  std::string family() const;

  SupportBounds support() const;
  MeasureTails tails() const;

  /// Total mass; +inf for infinite activity.
  double total_mass() const;

  /// Image measure under x -> y x.
  LevyMeasure scaled(double y) const;
  /// The measure y K.
  LevyMeasure mass_scaled(double y) const;

 private:
  Kind kind_{ZeroMeasure{}};
  double size_scale_ = 1.0;
  double mass_scale_ = 1.0;
};

/// ∫ f(x) K(dx). f has to be O(x^2) near zero unless the measure has finite
/// activity. `singularities` are points where f has kinks or blows up; they
/// become panel boundaries. Throws Error(divergent) if the declared tail
/// growth is not integrable according to the tail metadata, and
/// Error(quadrature_failure) if the quadrature cannot meet its tolerance.
double integrate_levy(const LevyMeasure& measure, const std::function<double(double)>& f,
                      std::span<const double> singularities = {},
                      const TailGrowth& growth = {}, const quadrature::Options& options = {});

/// ∫ f(x) e^{tilt x} K(dx), with the exponential folded into the density so
/// that f may be the bounded factor of an integrand that overflows on its own.
/// `growth` describes the full integrand f(x) e^{tilt x}.
double integrate_levy_tilted(const LevyMeasure& measure, const std::function<double(double)>& f,
                             double tilt, std::span<const double> singularities = {},
                             const TailGrowth& growth = {},
                             const quadrature::Options& options = {});

/// True iff ∫_{x>1} e^{u x} K(dx) < inf, decided from the tail metadata.
bool exp_moment_finite(const LevyMeasure& measure, double u);

/// True iff ∫_{|x|>1} e^{u x} K(dx) < inf (both tails).
bool exp_moment_finite_two_sided(const LevyMeasure& measure, double u);

/// True iff ∫_{|x|>1} |x|^q K(dx) < inf along the requested side.
bool tail_moment_finite(const TailSide& side, double exp_growth, double power_growth);

SupportBounds support_bounds(const LevyMeasure& measure);

}  // namespace powerutil
