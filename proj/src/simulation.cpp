#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/expint.hpp>

#include "powerutil/error.hpp"
#include "powerutil/mc_oracle.hpp"

namespace powerutil {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// (1 - e^{-x}) / x
double phi1(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - 0.5 * x;
  return -std::expm1(-x) / x;
}

// (x - 1 + e^{-x}) / x^2
double phi2(double x) {
  if (std::abs(x) < 1e-3) return 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0;
  return (x + std::expm1(-x)) / (x * x);
}

// Exponential-moment draws of the explosion-example jump law
// e^{-theta z} / z^2 on z > 1.
double sample_explosion(double theta, rng::Stream& s) {
  if (theta < 1.0) {
    for (;;) {
      const double z = 1.0 / s.uniform();
      if (s.uniform() < std::exp(-theta * (z - 1.0))) return z;
    }
  }
  for (;;) {
    const double z = 1.0 + s.exponential(theta);
    if (s.uniform() * z * z < 1.0) return z;
  }
}

bool is_gamma(const LevyMeasure& m) { return std::holds_alternative<GammaMeasure>(m.kind()); }

double lookup_user(const UserPath& path, double t) {
  const auto it = std::upper_bound(path.times.begin(), path.times.end(), t * (1.0 + 1e-12) + 1e-15);
  if (it == path.times.begin()) return path.values.front();
  return path.values[static_cast<std::size_t>(it - path.times.begin()) - 1];
}

}  // namespace

std::vector<double> time_grid(double T, int n_steps) {
  require(n_steps > 0, ErrorCode::invalid_argument, "time_grid: n_steps must be positive");
  require(T >= 0.0 && std::isfinite(T), ErrorCode::invalid_argument,
          "time_grid: horizon must be finite and nonnegative");
  std::vector<double> grid(static_cast<std::size_t>(n_steps) + 1);
  for (int k = 0; k <= n_steps; ++k) grid[k] = T * k / n_steps;
  grid.back() = T;
  return grid;
}

JumpSampler::JumpSampler(const LevyMeasure& measure, double cutoff) : measure_(measure) {
  require(cutoff > 0.0, ErrorCode::invalid_argument, "JumpSampler: cutoff must be positive");
  const double s = measure.size_scale();
  const double w = measure.mass_scale();
  if (const auto* g = std::get_if<GammaMeasure>(&measure.kind())) {
    const double r = g->rate;
    // a ∫_0^eps z e^{-rz} dz <= a eps^2 / 2 against the total variance a / r^2.
    eps_ = std::min(cutoff / std::abs(s), std::sqrt(2e-6) / r);
    const double e_eps = boost::math::expint(1, r * eps_);
    const double e_one = eps_ < 1.0 ? boost::math::expint(1, r) : e_eps;
    rate_ = w * g->shape * e_eps;
    region_split_ = eps_ < 1.0 ? (e_eps - e_one) / e_eps : 0.0;
    small_drift_ = s * w * g->shape * (-std::expm1(-r * eps_)) / r;
    return;
  }
  rate_ = measure.total_mass();
  if (const auto* a = std::get_if<AtomicMeasure>(&measure.kind())) {
    double sum = 0.0;
    for (const auto& atom : a->atoms) {
      sum += atom.weight;
      cumulative_.push_back(sum);
    }
  }
}

double JumpSampler::sample(rng::Stream& st) const {
  const double s = measure_.size_scale();
  auto shaped = [](double y, JumpScale scale) {
    return scale == JumpScale::log ? std::expm1(y) : y;
  };
  const double base = std::visit(
      Overloaded{
          [](const ZeroMeasure&) { return 0.0; },
          [&](const AtomicMeasure& m) {
            const double u = st.uniform() * cumulative_.back();
            auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
            if (it == cumulative_.end()) --it;
            return m.atoms[static_cast<std::size_t>(it - cumulative_.begin())].location;
          },
          [&](const KouMeasure& m) {
            const double y = st.uniform() < m.p_up ? st.exponential(m.eta_up)
                                                   : -st.exponential(m.eta_down);
            return shaped(y, m.scale);
          },
          [&](const NormalJumpMeasure& m) {
            return shaped(m.mean + m.stddev * st.normal(), m.scale);
          },
          [&](const GammaMeasure& m) {
            const double r = m.rate;
            if (eps_ < 1.0 && st.uniform() < region_split_) {
              const double log_span = -std::log(eps_);
              for (;;) {
                const double z = eps_ * std::exp(st.uniform() * log_span);
                if (st.uniform() < std::exp(-r * (z - eps_))) return z;
              }
            }
            const double start = std::max(eps_, 1.0);
            for (;;) {
              const double z = start + st.exponential(r);
              if (st.uniform() * z < start) return z;
            }
          },
          [&](const CompoundPoissonExpMeasure& m) { return st.exponential(m.jump_rate); },
          [&](const ExplosionMeasure& m) { return sample_explosion(-m.C / (2.0 * m.lambda), st); },
      },
      measure_.kind());
  return s * base;
}

std::vector<double> simulate_subordinator_increments(const LevyTriplet& Z,
                                                     const std::vector<double>& grid,
                                                     rng::Stream& stream, double cutoff) {
  require(grid.size() >= 2, ErrorCode::invalid_argument,
          "simulate_subordinator_increments: grid needs two points");
  const double b0 = zero_truncation_drift(Z);
  std::vector<double> dZ(grid.size() - 1);
  const bool gamma = is_gamma(Z.jumps);
  const JumpSampler sampler = gamma ? JumpSampler{} : JumpSampler(Z.jumps, cutoff);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double dt = grid[k + 1] - grid[k];
    double inc = b0 * dt;
    if (gamma) {
      const auto& g = std::get<GammaMeasure>(Z.jumps.kind());
      inc += Z.jumps.size_scale() * stream.gamma(Z.jumps.mass_scale() * g.shape * dt) / g.rate;
    } else if (sampler.rate() > 0.0) {
      const std::uint64_t n = stream.poisson(sampler.rate() * dt);
      for (std::uint64_t j = 0; j < n; ++j) inc += sampler.sample(stream);
    }
    dZ[k] = inc;
  }
  return dZ;
}

std::vector<double> simulate_ou_path(double lambda, double y0, const std::vector<double>& dZ,
                                     const std::vector<double>& grid) {
  require(dZ.size() + 1 == grid.size(), ErrorCode::invalid_argument,
          "simulate_ou_path: need one increment per grid step");
  std::vector<double> y(grid.size());
  y[0] = y0;
  for (std::size_t k = 0; k < dZ.size(); ++k) {
    const double dt = grid[k + 1] - grid[k];
    y[k + 1] = y[k] * std::exp(-lambda * dt) + dZ[k];
  }
  return y;
}

FactorSampler::FactorSampler(const FactorProcessSpec& factor, double cutoff) : factor_(&factor) {
  if (const auto* ou = std::get_if<OUSubordinator>(&factor)) {
    drift0_ = zero_truncation_drift(ou->Z);
    gamma_ = is_gamma(ou->Z.jumps);
    if (!gamma_) jumps_ = JumpSampler(ou->Z.jumps, cutoff);
  }
}

void FactorSampler::sample(const std::vector<double>& grid, rng::Stream& st,
                           FactorPath& out) const {
  const std::size_t n = grid.size() - 1;
  out.time = grid;
  out.y.resize(n + 1);
  out.activity.resize(n);
  std::visit(
      Overloaded{
          [&](const ConstantFactor& c) {
            std::fill(out.y.begin(), out.y.end(), c.y);
            for (std::size_t k = 0; k < n; ++k) out.activity[k] = c.y * (grid[k + 1] - grid[k]);
          },
          [&](const UserPath& u) {
            for (std::size_t k = 0; k <= n; ++k) out.y[k] = lookup_user(u, grid[k]);
            for (std::size_t k = 0; k < n; ++k) {
              out.activity[k] = out.y[k] * (grid[k + 1] - grid[k]);
            }
          },
          [&](const OUSubordinator& ou) { sample_ou(ou, grid, st, out); },
      },
      *factor_);
}

void FactorSampler::sample_ou(const OUSubordinator& ou, const std::vector<double>& grid,
                              rng::Stream& st, FactorPath& out) const {
  const double lam = ou.lambda;
  out.y[0] = ou.y0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double dt = grid[k + 1] - grid[k];
    const double x = lam * dt;
    double y = out.y[k] * std::exp(-x) + drift0_ * dt * phi1(x);
    double area = out.y[k] * dt * phi1(x) + drift0_ * dt * dt * phi2(x);
    if (gamma_) {
      const auto& g = std::get<GammaMeasure>(ou.Z.jumps.kind());
      y += ou.Z.jumps.size_scale() * st.gamma(ou.Z.jumps.mass_scale() * g.shape * dt) / g.rate;
    } else if (jumps_.rate() > 0.0) {
      const std::uint64_t count = st.poisson(jumps_.rate() * dt);
      for (std::uint64_t j = 0; j < count; ++j) {
        const double remaining = dt * st.uniform();
        const double size = jumps_.sample(st);
        y += size * std::exp(-lam * remaining);
        area += size * remaining * phi1(lam * remaining);
      }
    }
    out.y[k + 1] = y;
    out.activity[k] = area;
  }
}

FactorPath simulate_factor(const FactorProcessSpec& factor, const std::vector<double>& grid,
                           rng::Stream& stream, double cutoff) {
  require(grid.size() >= 2, ErrorCode::invalid_argument, "simulate_factor: grid needs two points");
  FactorPath out;
  FactorSampler(factor, cutoff).sample(grid, stream, out);
  return out;
}

void ReturnPath::clear() {
  continuous.clear();
  variance.clear();
  offset.assign(1, 0);
  jumps.clear();
}

double ReturnPath::wealth_factor(std::size_t k, double pi) const {
  double f = std::exp(pi * continuous[k] - 0.5 * pi * pi * variance[k]);
  for (std::size_t j = offset[k]; j < offset[k + 1]; ++j) {
    const double r = 1.0 + pi * jumps[j];
    if (!(r > 0.0)) return 0.0;
    f *= r;
  }
  return f;
}

ReturnSampler::ReturnSampler(const FactorModelSpec& model, double cutoff) : model_(&model) {
  const LevyTriplet* B = nullptr;
  if (const auto* il = std::get_if<IntegratedLevy>(&model.family)) B = &il->B;
  if (const auto* tc = std::get_if<TimeChangedLevy>(&model.family)) B = &tc->B;
  if (B == nullptr) return;
  jumps_ = JumpSampler(B->jumps, cutoff);
  drift0_ = zero_truncation_drift(*B) + jumps_.small_jump_drift();
  diffusion_ = B->diffusion;
}

void ReturnSampler::sample(const FactorPath& factor, rng::Stream& diffusion, rng::Stream& jumps,
                           bool negate_normals, ReturnPath& out) const {
  out.clear();
  const std::size_t n = factor.activity.size();
  const double sign = negate_normals ? -1.0 : 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dt = factor.time[k + 1] - factor.time[k];
    const double y = factor.y[k];
    double mean = 0.0;
    double var = 0.0;
    double size = 1.0;
    double clock = 0.0;
    std::visit(Overloaded{
                   [&](const GenBS& m) {
                     const double sig = m.sigma(y);
                     mean = m.mu(y) * dt;
                     var = sig * sig * dt;
                   },
                   [&](const BNS& m) {
                     mean = (m.kappa + m.delta * y) * dt;
                     var = y * dt;
                   },
                   [&](const IntegratedLevy&) {
                     mean = y * drift0_ * dt;
                     var = y * y * diffusion_ * dt;
                     size = y;
                     clock = dt;
                   },
                   [&](const TimeChangedLevy& m) {
                     const double tau = y * dt;
                     mean = m.mu * dt + drift0_ * tau;
                     var = diffusion_ * tau;
                     clock = tau;
                   },
               },
               model_->family);
    const double noise = var > 0.0 ? std::sqrt(var) * sign * diffusion.normal() : 0.0;
    out.continuous.push_back(mean + noise);
    out.variance.push_back(var);
    if (clock > 0.0 && jumps_.rate() > 0.0) {
      const std::uint64_t count = jumps.poisson(jumps_.rate() * clock);
      for (std::uint64_t j = 0; j < count; ++j) out.jumps.push_back(size * jumps_.sample(jumps));
    }
    out.offset.push_back(out.jumps.size());
  }
}

ReturnPath simulate_return_increments(const FactorModelSpec& model, const FactorPath& factor,
                                      rng::Stream& diffusion, rng::Stream& jumps, double cutoff) {
  for (double y : factor.y) {
    require(y > 0.0, ErrorCode::invalid_argument,
            "simulate_return_increments: factor path must be positive");
  }
  ReturnPath out;
  ReturnSampler(model, cutoff).sample(factor, diffusion, jumps, false, out);
  return out;
}

}  // namespace powerutil
