#include "powerutil/levy_measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/expint.hpp>

#include "powerutil/error.hpp"

namespace powerutil {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream os;
    os << "LevyMeasure: " << what << " must be positive and finite, got " << value;
    throw Error(ErrorCode::invalid_argument, os.str());
  }
}

void validate(const LevyMeasure::Kind& kind) {
  std::visit(Overloaded{
                 [](const ZeroMeasure&) {},
                 [](const AtomicMeasure& m) {
                   for (const auto& a : m.atoms) {
                     require(std::isfinite(a.location) && a.location != 0.0,
                             ErrorCode::invalid_argument,
                             "LevyMeasure: atom locations must be finite and nonzero");
                     check_positive(a.weight, "atom weight");
                   }
                 },
                 [](const KouMeasure& m) {
                   check_positive(m.intensity, "kou intensity");
                   require(m.p_up >= 0.0 && m.p_up <= 1.0, ErrorCode::invalid_argument,
                           "LevyMeasure: kou p_up must lie in [0, 1]");
                   check_positive(m.eta_up, "kou eta_up");
                   check_positive(m.eta_down, "kou eta_down");
                 },
                 [](const NormalJumpMeasure& m) {
                   check_positive(m.intensity, "normal intensity");
                   require(std::isfinite(m.mean), ErrorCode::invalid_argument,
                           "LevyMeasure: normal mean must be finite");
                   check_positive(m.stddev, "normal stddev");
                 },
                 [](const GammaMeasure& m) {
                   check_positive(m.shape, "gamma shape");
                   check_positive(m.rate, "gamma rate");
                 },
                 [](const CompoundPoissonExpMeasure& m) {
                   check_positive(m.intensity, "compound Poisson intensity");
                   check_positive(m.jump_rate, "compound Poisson jump rate");
                 },
                 [](const ExplosionMeasure& m) {
                   require(m.C < 0.0 && std::isfinite(m.C), ErrorCode::invalid_argument,
                           "LevyMeasure: explosion C must be negative");
                   check_positive(m.lambda, "explosion lambda");
                 },
             },
             kind);
}

double explosion_rate(const ExplosionMeasure& m) { return -m.C / (2.0 * m.lambda); }

// Metadata of the unscaled family.
MeasureTails base_tails(const LevyMeasure::Kind& kind) {
  MeasureTails t;
  std::visit(
      Overloaded{
          [&](const ZeroMeasure&) {},
          [&](const AtomicMeasure&) {
            t.lower_edge_order = 0.0;
            t.upper_edge_order = 0.0;
          },
          [&](const KouMeasure& m) {
            if (m.scale == JumpScale::additive) {
              if (m.p_up > 0.0) t.positive = {m.eta_up, TailBoundary::pole, kInf};
              if (m.p_up < 1.0) t.negative = {m.eta_down, TailBoundary::pole, kInf};
              if (m.p_up == 1.0) t.lower_edge_order = 1.0;
              if (m.p_up == 0.0) t.upper_edge_order = 1.0;
            } else {
              // Density of x = e^Y - 1 decays like (1 + x)^{-eta_up - 1}.
              if (m.p_up > 0.0) t.positive = {0.0, TailBoundary::finite, m.eta_up};
              t.lower_edge_order = m.p_up < 1.0 ? m.eta_down : 1.0;
              if (m.p_up == 0.0) t.upper_edge_order = 1.0;
            }
          },
          [&](const NormalJumpMeasure& m) {
            if (m.scale == JumpScale::log) {
              t.positive = {0.0, TailBoundary::finite, kInf};
              t.lower_edge_order = kInf;
            }
          },
          [&](const GammaMeasure& m) {
            t.positive = {m.rate, TailBoundary::log_divergent, kInf};
            t.lower_edge_order = 0.0;
            t.finite_activity = false;
          },
          [&](const CompoundPoissonExpMeasure& m) {
            t.positive = {m.jump_rate, TailBoundary::pole, kInf};
            t.lower_edge_order = 1.0;
          },
          [&](const ExplosionMeasure& m) {
            t.positive = {explosion_rate(m), TailBoundary::finite, kInf};
            t.lower_edge_order = 1.0;
          },
      },
      kind);
  return t;
}

SupportBounds base_support(const LevyMeasure::Kind& kind) {
  SupportBounds s;
  std::visit(Overloaded{
                 [&](const ZeroMeasure&) {},
                 [&](const AtomicMeasure& m) {
                   if (m.atoms.empty()) return;
                   s.empty = false;
                   s.lower = kInf;
                   s.upper = -kInf;
                   for (const auto& a : m.atoms) {
                     s.lower = std::min(s.lower, a.location);
                     s.upper = std::max(s.upper, a.location);
                   }
                   s.lower_atom = s.upper_atom = true;
                 },
                 [&](const KouMeasure& m) {
                   s.empty = false;
                   const double floor = m.scale == JumpScale::additive ? -kInf : -1.0;
                   s.lower = m.p_up < 1.0 ? floor : 0.0;
                   s.upper = m.p_up > 0.0 ? kInf : 0.0;
                 },
                 [&](const NormalJumpMeasure& m) {
                   s.empty = false;
                   s.lower = m.scale == JumpScale::additive ? -kInf : -1.0;
                   s.upper = kInf;
                 },
                 [&](const GammaMeasure&) {
                   s.empty = false;
                   s.lower = 0.0;
                   s.upper = kInf;
                 },
                 [&](const CompoundPoissonExpMeasure&) {
                   s.empty = false;
                   s.lower = 0.0;
                   s.upper = kInf;
                 },
                 [&](const ExplosionMeasure&) {
                   s.empty = false;
                   s.lower = 1.0;
                   s.upper = kInf;
                 },
             },
             kind);
  return s;
}

// A continuous family written as ∫ f(x(u)) density(u) du over panels in the
// variable u.
struct ContinuousForm {
  bool log_map = false;
  double u_lo = -kInf;
  double u_hi = kInf;
  std::vector<double> interior;  // kinks of the density
  double lower_scale = 1.0;
  double upper_scale = 1.0;
};

// Below this value of log(1 + x) the point x cannot be told apart from -1
// in double precision; log-scaled families are integrated from here on.
constexpr double kLogFloor = -31.9;

double clamp_scale(double s) { return std::clamp(s, 1e-6, 1e6); }

double decay_scale(double rate, double growth) {
  return clamp_scale(1.0 / std::max(rate - growth, 1e-6 * rate));
}

}  // namespace

LevyMeasure::LevyMeasure(Kind kind) : kind_(std::move(kind)) { validate(kind_); }

LevyMeasure LevyMeasure::atoms(std::vector<Atom> atoms) {
  if (atoms.empty()) return zero();
  return LevyMeasure(AtomicMeasure{std::move(atoms)});
}

LevyMeasure LevyMeasure::kou(double intensity, double p_up, double eta_up, double eta_down,
                             JumpScale scale) {
  return LevyMeasure(KouMeasure{intensity, p_up, eta_up, eta_down, scale});
}

LevyMeasure LevyMeasure::normal(double intensity, double mean, double stddev, JumpScale scale) {
  return LevyMeasure(NormalJumpMeasure{intensity, mean, stddev, scale});
}

LevyMeasure LevyMeasure::gamma(double shape, double rate) {
  return LevyMeasure(GammaMeasure{shape, rate});
}

LevyMeasure LevyMeasure::compound_poisson_exp(double intensity, double jump_rate) {
  return LevyMeasure(CompoundPoissonExpMeasure{intensity, jump_rate});
}

LevyMeasure LevyMeasure::explosion(double C, double lambda) {
  return LevyMeasure(ExplosionMeasure{C, lambda});
}

std::string LevyMeasure::family() const {
  return std::visit(Overloaded{
                        [](const ZeroMeasure&) { return std::string("zero"); },
                        [](const AtomicMeasure&) { return std::string("atoms"); },
                        [](const KouMeasure&) { return std::string("kou"); },
                        [](const NormalJumpMeasure&) { return std::string("normal"); },
                        [](const GammaMeasure&) { return std::string("gamma"); },
                        [](const CompoundPoissonExpMeasure&) { return std::string("cp_exp"); },
                        [](const ExplosionMeasure&) { return std::string("explosion"); },
                    },
                    kind_);
}

SupportBounds LevyMeasure::support() const {
  SupportBounds s = base_support(kind_);
  if (s.empty || size_scale_ == 1.0) return s;
  const double y = size_scale_;
  SupportBounds out = s;
  if (y > 0.0) {
    out.lower = s.lower * y;
    out.upper = s.upper * y;
  } else {
    out.lower = s.upper * y;
    out.upper = s.lower * y;
    out.lower_atom = s.upper_atom;
    out.upper_atom = s.lower_atom;
  }
  return out;
}

MeasureTails LevyMeasure::tails() const {
  MeasureTails t = base_tails(kind_);
  if (size_scale_ == 1.0) return t;
  const double a = std::abs(size_scale_);
  auto rescale = [a](TailSide side) {
    side.exp_rate /= a;
    return side;
  };
  MeasureTails out = t;
  if (size_scale_ > 0.0) {
    out.positive = rescale(t.positive);
    out.negative = rescale(t.negative);
  } else {
    out.positive = rescale(t.negative);
    out.negative = rescale(t.positive);
    out.lower_edge_order = t.upper_edge_order;
    out.upper_edge_order = t.lower_edge_order;
  }
  return out;
}

double LevyMeasure::total_mass() const {
  const double base = std::visit(
      Overloaded{
          [](const ZeroMeasure&) { return 0.0; },
          [](const AtomicMeasure& m) {
            double sum = 0.0;
            for (const auto& a : m.atoms) sum += a.weight;
            return sum;
          },
          [](const KouMeasure& m) { return m.intensity; },
          [](const NormalJumpMeasure& m) { return m.intensity; },
          [](const GammaMeasure&) { return kInf; },
          [](const CompoundPoissonExpMeasure& m) { return m.intensity; },
          [](const ExplosionMeasure& m) { return boost::math::expint(2, explosion_rate(m)); },
      },
      kind_);
  return base * mass_scale_;
}

LevyMeasure LevyMeasure::scaled(double y) const {
  require(std::isfinite(y), ErrorCode::invalid_argument, "LevyMeasure::scaled: non-finite factor");
  if (y == 0.0 || is_zero()) return zero();
  if (y == 1.0) return *this;
  LevyMeasure out = *this;
  if (auto* atoms = std::get_if<AtomicMeasure>(&out.kind_)) {
    for (auto& a : atoms->atoms) a.location *= y;
    return out;
  }
  if (size_scale_ == 1.0) {
    if (auto* kou = std::get_if<KouMeasure>(&out.kind_); kou && kou->scale == JumpScale::additive) {
      const double a = std::abs(y);
      if (y > 0.0) {
        kou->eta_up /= a;
        kou->eta_down /= a;
      } else {
        const double up = kou->eta_up;
        kou->eta_up = kou->eta_down / a;
        kou->eta_down = up / a;
        kou->p_up = 1.0 - kou->p_up;
      }
      return out;
    }
    if (auto* n = std::get_if<NormalJumpMeasure>(&out.kind_);
        n && n->scale == JumpScale::additive) {
      n->mean *= y;
      n->stddev *= std::abs(y);
      return out;
    }
    if (y > 0.0) {
      if (auto* g = std::get_if<GammaMeasure>(&out.kind_)) {
        g->rate /= y;
        return out;
      }
      if (auto* cp = std::get_if<CompoundPoissonExpMeasure>(&out.kind_)) {
        cp->jump_rate /= y;
        return out;
      }
    }
  }
  out.size_scale_ *= y;
  return out;
}

LevyMeasure LevyMeasure::mass_scaled(double y) const {
  require(y >= 0.0 && std::isfinite(y), ErrorCode::invalid_argument,
          "LevyMeasure::mass_scaled: factor must be nonnegative");
  if (y == 0.0 || is_zero()) return zero();
  LevyMeasure out = *this;
  std::visit(Overloaded{
                 [](ZeroMeasure&) {},
                 [y](AtomicMeasure& m) {
                   for (auto& a : m.atoms) a.weight *= y;
                 },
                 [y](KouMeasure& m) { m.intensity *= y; },
                 [y](NormalJumpMeasure& m) { m.intensity *= y; },
                 [y](GammaMeasure& m) { m.shape *= y; },
                 [y](CompoundPoissonExpMeasure& m) { m.intensity *= y; },
                 [y, &out](ExplosionMeasure&) { out.mass_scale_ *= y; },
             },
             out.kind_);
  return out;
}

bool tail_moment_finite(const TailSide& side, double exp_growth, double power_growth) {
  if (exp_growth > 0.0) {
    if (exp_growth < side.exp_rate) return true;
    return exp_growth == side.exp_rate && side.at_rate == TailBoundary::finite &&
           power_growth <= 0.0;
  }
  if (exp_growth < 0.0 || power_growth <= 0.0) return true;
  if (side.exp_rate > 0.0) return true;
  return power_growth < side.power_index;
}

bool exp_moment_finite(const LevyMeasure& measure, double u) {
  return tail_moment_finite(measure.tails().positive, u, 0.0);
}

bool exp_moment_finite_two_sided(const LevyMeasure& measure, double u) {
  const MeasureTails t = measure.tails();
  return tail_moment_finite(t.positive, u, 0.0) && tail_moment_finite(t.negative, -u, 0.0);
}

SupportBounds support_bounds(const LevyMeasure& measure) { return measure.support(); }

namespace {

double integrate_impl(const LevyMeasure& measure, const std::function<double(double)>& f,
                      double tilt, std::span<const double> singularities,
                      const TailGrowth& growth, const quadrature::Options& options) {
  const MeasureTails tails = measure.tails();
  if (!tail_moment_finite(tails.positive, growth.positive_exp, growth.positive_power) ||
      !tail_moment_finite(tails.negative, growth.negative_exp, growth.negative_power)) {
    throw Error(ErrorCode::divergent,
                "integrate_levy: integrand growth is not integrable against the " +
                    measure.family() + " tail");
  }

  const double s = measure.size_scale();
  const double w = measure.mass_scale();
  const auto& kind = measure.kind();

  if (std::holds_alternative<ZeroMeasure>(kind)) return 0.0;
  if (const auto* atoms = std::get_if<AtomicMeasure>(&kind)) {
    double sum = 0.0;
    for (const auto& a : atoms->atoms) {
      const double x = s * a.location;
      sum += a.weight * f(x) * (tilt == 0.0 ? 1.0 : std::exp(tilt * x));
    }
    return w * sum;
  }

  // Growth of the integrand in the integration variable along its two ends.
  const bool flipped = s < 0.0;
  const double up_exp = flipped ? growth.negative_exp : growth.positive_exp;
  const double down_exp = flipped ? growth.positive_exp : growth.negative_exp;
  const double up_pow = flipped ? growth.negative_power : growth.positive_power;
  const double as = std::abs(s);

  ContinuousForm form;
  std::function<double(double)> log_density;
  std::visit(
      Overloaded{
          [](const ZeroMeasure&) {},
          [](const AtomicMeasure&) {},
          [&](const KouMeasure& m) {
            form.log_map = m.scale == JumpScale::log;
            form.u_lo = m.p_up < 1.0 ? (form.log_map ? kLogFloor : -kInf) : 0.0;
            form.u_hi = m.p_up > 0.0 ? kInf : 0.0;
            form.interior = {0.0};
            const double g_up = form.log_map ? up_pow : up_exp * as;
            const double g_down = form.log_map ? 0.0 : down_exp * as;
            form.upper_scale = decay_scale(m.eta_up, g_up);
            form.lower_scale = decay_scale(m.eta_down, g_down);
            const double up_w = std::log(m.intensity * m.p_up * m.eta_up);
            const double down_w = std::log(m.intensity * (1.0 - m.p_up) * m.eta_down);
            log_density = [=](double u) {
              return u > 0.0 ? up_w - m.eta_up * u : down_w + m.eta_down * u;
            };
          },
          [&](const NormalJumpMeasure& m) {
            form.log_map = m.scale == JumpScale::log;
            if (form.log_map) form.u_lo = std::min(kLogFloor, m.mean - 40.0 * m.stddev);
            form.interior = {m.mean};
            form.lower_scale = form.upper_scale = clamp_scale(m.stddev);
            const double norm =
                std::log(m.intensity / (m.stddev * std::sqrt(2.0 * std::numbers::pi)));
            log_density = [=](double u) {
              const double z = (u - m.mean) / m.stddev;
              return norm - 0.5 * z * z;
            };
          },
          [&](const GammaMeasure& m) {
            form.u_lo = 0.0;
            form.interior = {1.0 / as};
            form.upper_scale = decay_scale(m.rate, up_exp * as);
            const double ls = std::log(m.shape);
            log_density = [=](double u) { return ls - m.rate * u - std::log(u); };
          },
          [&](const CompoundPoissonExpMeasure& m) {
            form.u_lo = 0.0;
            form.upper_scale = decay_scale(m.jump_rate, up_exp * as);
            const double c = std::log(m.intensity * m.jump_rate);
            log_density = [=](double u) { return c - m.jump_rate * u; };
          },
          [&](const ExplosionMeasure& m) {
            form.u_lo = 1.0;
            const double rate = explosion_rate(m);
            // The z^-2 factor dominates unless the exponential decay is fast.
            form.upper_scale = clamp_scale(1.0 / std::max(rate - up_exp * as, 1.0));
            log_density = [=](double u) { return -rate * u - 2.0 * std::log(u); };
          },
      },
      kind);

  std::vector<double> points{form.u_lo, form.u_hi};
  for (double u : form.interior) points.push_back(u);
  auto add_x_point = [&](double x) {
    const double base = x / s;
    if (form.log_map) {
      if (1.0 + base > 0.0) points.push_back(std::log1p(base));
    } else {
      points.push_back(base);
    }
  };
  add_x_point(0.0);
  add_x_point(1.0);
  add_x_point(-1.0);
  for (double x : singularities) {
    if (std::isfinite(x)) add_x_point(x);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  std::vector<double> panels;
  for (double u : points) {
    if (u >= form.u_lo && u <= form.u_hi) panels.push_back(u);
  }

  quadrature::Options opts = options;
  opts.lower_tail_scale = form.lower_scale;
  opts.upper_tail_scale = form.upper_scale;
  const bool log_map = form.log_map;
  auto integrand = [&](double u) {
    double e = log_density(u);
    if (e < -745.0) return 0.0;
    const double x = s * (log_map ? std::expm1(u) : u);
    if (!std::isfinite(x)) return 0.0;
    if (tilt != 0.0) e += tilt * x;
    if (e < -745.0) return 0.0;
    const double fx = f(x);
    return fx == 0.0 ? 0.0 : fx * std::exp(e);
  };
  const auto result = quadrature::integrate(integrand, std::span<const double>(panels), opts);
  return w * result.value;
}

}  // namespace

double integrate_levy(const LevyMeasure& measure, const std::function<double(double)>& f,
                      std::span<const double> singularities, const TailGrowth& growth,
                      const quadrature::Options& options) {
  return integrate_impl(measure, f, 0.0, singularities, growth, options);
}

double integrate_levy_tilted(const LevyMeasure& measure, const std::function<double(double)>& f,
                             double tilt, std::span<const double> singularities,
                             const TailGrowth& growth, const quadrature::Options& options) {
  return integrate_impl(measure, f, tilt, singularities, growth, options);
}

}  // namespace powerutil
