#include "powerutil/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <span>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "powerutil/error.hpp"

namespace powerutil {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Pairwise summation over a fixed tree, independent of how the values were
// produced.
double tree_sum(std::span<const double> x) {
  if (x.size() <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return tree_sum(x.first(half)) + tree_sum(x.subspan(half));
}

// Samples with NaN marking a discarded path. Antithetic pairs are averaged
// first; a pair with a discarded member is dropped whole.
UtilityEstimate summarize(const std::vector<double>& samples, bool antithetic) {
  std::vector<double> kept;
  kept.reserve(antithetic ? samples.size() / 2 : samples.size());
  std::int64_t discarded = 0;
  if (antithetic) {
    for (std::size_t i = 0; i + 1 < samples.size(); i += 2) {
      if (std::isnan(samples[i]) || std::isnan(samples[i + 1])) {
        discarded += 2;
      } else {
        kept.push_back(0.5 * (samples[i] + samples[i + 1]));
      }
    }
  } else {
    for (double v : samples) {
      if (std::isnan(v)) {
        ++discarded;
      } else {
        kept.push_back(v);
      }
    }
  }
  UtilityEstimate e;
  e.n_effective = static_cast<std::int64_t>(kept.size());
  e.n_discarded = discarded;
  e.reliable = static_cast<double>(discarded) <=
               kMaxDiscardRate * static_cast<double>(samples.size());
  if (kept.empty()) {
    e.mean = kNaN;
    e.std_error = kNaN;
    e.reliable = false;
    return e;
  }
  e.mean = tree_sum(kept) / static_cast<double>(kept.size());
  if (kept.size() > 1) {
    for (double& v : kept) v = (v - e.mean) * (v - e.mean);
    const double var = tree_sum(kept) / static_cast<double>(kept.size() - 1);
    e.std_error = std::sqrt(var / static_cast<double>(e.n_effective));
  }
  return e;
}

void require_reliable(const UtilityEstimate& e, const char* what) {
  if (e.reliable) return;
  std::ostringstream os;
  os << what << ": " << e.n_discarded << " paths ruined by a jump within a step ("
     << "more than " << kMaxDiscardRate * 100.0 << "% of the paths)";
  throw Error(ErrorCode::unreliable, os.str());
}

// Runs body(begin, end) on contiguous chunks. The first exception in chunk
// order is rethrown.
template <class Body>
void parallel_chunks(std::int64_t n, int workers, Body&& body) {
  const std::int64_t w = std::max<std::int64_t>(1, std::min<std::int64_t>(workers, n));
  if (w == 1) {
    body(0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(w));
  for (std::int64_t i = 0; i < w; ++i) {
    const std::int64_t begin = n * i / w;
    const std::int64_t end = n * (i + 1) / w;
    threads.emplace_back([&, i, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// alpha of the local triplet at state y. Jump integrals are memoised on the
// argument of the base exponent.
class LocalAlpha {
 public:
  explicit LocalAlpha(const FactorModelSpec& model) : model_(&model), p_(model.prefs.p) {}

  double operator()(double pi, double y) {
    const double p = p_;
    auto gaussian = [p](double pi, double mu, double var) {
      return (1.0 - p) * pi * mu - 0.5 * p * (1.0 - p) * pi * pi * var;
    };
    return std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, GenBS>) {
            const double s = m.sigma(y);
            return gaussian(pi, m.mu(y), s * s);
          } else if constexpr (std::is_same_v<M, BNS>) {
            return gaussian(pi, m.kappa + m.delta * y, y);
          } else if constexpr (std::is_same_v<M, IntegratedLevy>) {
            return base(m.B, pi * y);
          } else {
            return (1.0 - p) * pi * m.mu + y * base(m.B, pi);
          }
        },
        model_->family);
  }

 private:
  double base(const LevyTriplet& B, double pi) {
    if (auto it = cache_.find(pi); it != cache_.end()) return it->second;
    const double a = growth_exponent_alpha(B, p_, pi);
    if (cache_.size() < 100000) cache_.emplace(pi, a);
    return a;
  }

  const FactorModelSpec* model_;
  double p_;
  std::unordered_map<double, double> cache_;
};

struct Outcomes {
  std::size_t n_strategies = 0;
  std::vector<double> log_wealth;  // path-major, NaN when ruined
  std::vector<double> log_weight;  // -sum alpha_k dt of strategy 0
};

std::uint32_t stream_index(std::int64_t path, bool antithetic) {
  return static_cast<std::uint32_t>(antithetic ? path / 2 : path);
}

Outcomes run_strategies(const FactorModelSpec& model, const std::vector<StrategyRule>& rules,
                        const SimConfig& cfg, bool with_weight) {
  validate(model);
  validate(cfg);
  const std::vector<double> grid = time_grid(model.prefs.T, cfg.n_steps);
  const FactorProcessSpec factor = factor_of(model);
  const FactorSampler factor_sampler(factor, cfg.small_jump_cutoff);
  const ReturnSampler return_sampler(model, cfg.small_jump_cutoff);
  Outcomes out;
  out.n_strategies = rules.size();
  out.log_wealth.assign(static_cast<std::size_t>(cfg.n_paths) * rules.size(), kNaN);
  if (with_weight) out.log_weight.assign(static_cast<std::size_t>(cfg.n_paths), kNaN);

  parallel_chunks(cfg.n_paths, cfg.workers, [&](std::int64_t begin, std::int64_t end) {
    FactorPath fp;
    ReturnPath rp;
    LocalAlpha alpha(model);
    std::vector<double> logv(rules.size());
    for (std::int64_t i = begin; i < end; ++i) {
      const std::uint32_t si = stream_index(i, cfg.antithetic);
      rng::Stream fst(cfg.seed, si, rng::Substream::factor);
      rng::Stream dst(cfg.seed, si, rng::Substream::diffusion);
      rng::Stream jst(cfg.seed, si, rng::Substream::jumps);
      factor_sampler.sample(grid, fst, fp);
      return_sampler.sample(fp, dst, jst, cfg.antithetic && (i % 2 == 1), rp);
      std::fill(logv.begin(), logv.end(), 0.0);
      double weight = 0.0;
      bool ruined = false;
      for (std::size_t k = 0; k < rp.steps() && !ruined; ++k) {
        const double y = fp.y[k];
        for (std::size_t s = 0; s < rules.size(); ++s) {
          const double pi = rules[s](y);
          if (pi == 0.0) continue;
          const double f = rp.wealth_factor(k, pi);
          if (!(f > 0.0)) {
            ruined = true;
            break;
          }
          logv[s] += std::log(f);
          if (s == 0 && with_weight) weight -= alpha(pi, y) * (grid[k + 1] - grid[k]);
        }
      }
      if (ruined) continue;
      const auto row = static_cast<std::size_t>(i) * rules.size();
      std::copy(logv.begin(), logv.end(), out.log_wealth.begin() + static_cast<std::ptrdiff_t>(row));
      if (with_weight) out.log_weight[static_cast<std::size_t>(i)] = weight;
    }
  });
  return out;
}

std::vector<double> column(const Outcomes& o, std::size_t s) {
  const std::size_t n = o.log_wealth.size() / o.n_strategies;
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = o.log_wealth[i * o.n_strategies + s];
  return c;
}

// u(v e^{l}) for log-wealth l.
double utility_of_log(double l, const Preferences& prefs) {
  const double q = 1.0 - prefs.p;
  return std::pow(prefs.v, q) * std::exp(q * l) / q;
}

}  // namespace

void validate(const SimConfig& cfg) {
  require(cfg.n_paths >= 2, ErrorCode::invalid_argument, "SimConfig: n_paths must be at least 2");
  require(cfg.n_paths <= (std::int64_t{1} << 32), ErrorCode::invalid_argument,
          "SimConfig: n_paths exceeds 2^32");
  require(cfg.n_steps >= 1, ErrorCode::invalid_argument, "SimConfig: n_steps must be positive");
  require(cfg.small_jump_cutoff > 0.0 && std::isfinite(cfg.small_jump_cutoff),
          ErrorCode::invalid_argument, "SimConfig: small_jump_cutoff must be positive");
  require(cfg.workers >= 1, ErrorCode::invalid_argument, "SimConfig: workers must be positive");
  require(!cfg.antithetic || cfg.n_paths % 2 == 0, ErrorCode::invalid_argument,
          "SimConfig: antithetic sampling needs an even n_paths");
  require(static_cast<double>(cfg.n_paths) * cfg.n_steps <= static_cast<double>(cfg.budget),
          ErrorCode::invalid_argument, "SimConfig: n_paths * n_steps exceeds the budget");
}

UtilityEstimate estimate_utility(const FactorModelSpec& model, const StrategyRule& rule,
                                 const SimConfig& cfg) {
  const Outcomes o = run_strategies(model, {rule}, cfg, false);
  std::vector<double> x = column(o, 0);
  for (double& v : x) {
    if (!std::isnan(v)) v = utility_of_log(v, model.prefs);
  }
  const UtilityEstimate e = summarize(x, cfg.antithetic);
  require_reliable(e, "estimate_utility");
  return e;
}

UtilityEstimate estimate_power_moment(const FactorModelSpec& model, const StrategyRule& rule,
                                      const SimConfig& cfg) {
  const Outcomes o = run_strategies(model, {rule}, cfg, false);
  std::vector<double> x = column(o, 0);
  for (double& v : x) {
    if (!std::isnan(v)) v = std::exp((1.0 - model.prefs.p) * v);
  }
  const UtilityEstimate e = summarize(x, cfg.antithetic);
  require_reliable(e, "estimate_power_moment");
  return e;
}

StrategyComparison compare_strategies(const FactorModelSpec& model, const StrategyRule& optimal,
                                      const std::vector<StrategyRule>& competitors,
                                      const SimConfig& cfg) {
  std::vector<StrategyRule> rules{optimal};
  rules.insert(rules.end(), competitors.begin(), competitors.end());
  const Outcomes o = run_strategies(model, rules, cfg, true);
  const Preferences& prefs = model.prefs;
  const double p = prefs.p;
  const std::vector<double> l0 = column(o, 0);
  const std::size_t n = l0.size();

  StrategyComparison c;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::isnan(l0[i]) ? kNaN : utility_of_log(l0[i], prefs);
  c.optimal = summarize(x, cfg.antithetic);
  require_reliable(c.optimal, "compare_strategies");
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::isnan(l0[i]) ? kNaN : std::exp(o.log_weight[i] + (1.0 - p) * l0[i]);
  }
  c.martingale = summarize(x, cfg.antithetic);

  for (std::size_t s = 1; s < rules.size(); ++s) {
    const std::vector<double> ls = column(o, s);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::isnan(ls[i]) ? kNaN : utility_of_log(ls[i], prefs);
    }
    c.competitors.push_back(summarize(x, cfg.antithetic));
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::isnan(ls[i]) ? kNaN
                               : utility_of_log(l0[i], prefs) - utility_of_log(ls[i], prefs);
    }
    const UtilityEstimate gap = summarize(x, cfg.antithetic);
    c.gap.push_back(gap.mean);
    c.gap_se.push_back(gap.std_error);
    c.resolved.push_back(gap.mean > 3.0 * gap.std_error);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::isnan(ls[i]) ? kNaN : std::exp(o.log_weight[i] - p * l0[i] + ls[i]);
    }
    c.supermartingale.push_back(summarize(x, cfg.antithetic));
  }
  return c;
}

UtilityEstimate estimate_value_time_changed(const TimeChangedLevy& model, double pi,
                                            const Preferences& prefs, const SimConfig& cfg) {
  validate(prefs);
  validate(cfg);
  require(model.mu == 0.0, ErrorCode::not_closed_form,
          "estimate_value_time_changed: needs mu = 0");
  const double C = constant_C(model.B, pi, prefs.p);
  if (!value_finite_at(model.Z, C, model.lambda, prefs.T)) {
    std::ostringstream os;
    os << "estimate_value_time_changed: the value is infinite at T = " << prefs.T
       << " (explosion time " << explosion_time(model.Z, C, model.lambda) << ")";
    throw Error(ErrorCode::out_of_domain, os.str());
  }
  const std::vector<double> grid = time_grid(prefs.T, cfg.n_steps);
  const FactorProcessSpec factor = OUSubordinator{model.lambda, model.Z, model.y0};
  const FactorSampler sampler(factor, cfg.small_jump_cutoff);
  std::vector<double> x(static_cast<std::size_t>(cfg.n_paths));
  const double u0 = power_utility(prefs.v, prefs.p);
  parallel_chunks(cfg.n_paths, cfg.workers, [&](std::int64_t begin, std::int64_t end) {
    FactorPath fp;
    for (std::int64_t i = begin; i < end; ++i) {
      rng::Stream fst(cfg.seed, stream_index(i, cfg.antithetic), rng::Substream::factor);
      sampler.sample(grid, fst, fp);
      x[static_cast<std::size_t>(i)] = u0 * std::exp(-C * tree_sum(fp.activity));
    }
  });
  return summarize(x, cfg.antithetic);
}

SimulatedPath simulate_path(const FactorModelSpec& model, const StrategyRule& rule,
                            const SimConfig& cfg, std::uint32_t path_index) {
  validate(model);
  validate(cfg);
  const std::vector<double> grid = time_grid(model.prefs.T, cfg.n_steps);
  const FactorProcessSpec factor = factor_of(model);
  rng::Stream fst(cfg.seed, path_index, rng::Substream::factor);
  rng::Stream dst(cfg.seed, path_index, rng::Substream::diffusion);
  rng::Stream jst(cfg.seed, path_index, rng::Substream::jumps);
  FactorPath fp;
  FactorSampler(factor, cfg.small_jump_cutoff).sample(grid, fst, fp);
  ReturnPath rp;
  ReturnSampler(model, cfg.small_jump_cutoff).sample(fp, dst, jst, false, rp);
  LocalAlpha alpha(model);
  SimulatedPath out;
  out.time = grid;
  out.y = fp.y;
  double S = model.S0;
  double V = model.prefs.v;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double pi = rule(fp.y[k]);
    out.pi.push_back(pi);
    out.alpha.push_back(alpha(pi, fp.y[k]));
    out.S.push_back(S);
    out.V.push_back(V);
    if (k == rp.steps()) break;
    S *= 1.0 + rp.simple_return(k);
    const double f = pi == 0.0 ? 1.0 : rp.wealth_factor(k, pi);
    if (!(f > 0.0)) out.ruined = true;
    V = out.ruined ? 0.0 : V * f;
  }
  return out;
}

double grid_oracle_optimal_fraction(const LevyTriplet& t, double p, double resolution,
                                    double window) {
  require(resolution > 0.0 && window > 0.0, ErrorCode::invalid_argument,
          "grid_oracle_optimal_fraction: resolution and window must be positive");
  if (t.is_degenerate()) return 0.0;
  const AdmissibleInterval I = admissible_interval(t.jumps, 1e-9);
  double lo = std::max(I.lo, -window);
  double hi = std::min(I.hi, window);
  const double orientation = p < 1.0 ? 1.0 : -1.0;
  quadrature::Options q;
  q.rel_tol = 1e-12;
  q.abs_tol = 1e-15;
  auto score = [&](double pi) {
    if (!alpha_integrable(t, p, pi)) return -kInf;
    try {
      return orientation * growth_exponent_alpha(t, p, pi, q);
    } catch (const Error&) {
      return -kInf;
    }
  };
  constexpr int kPoints = 1001;
  double best = 0.5 * (lo + hi);
  for (;;) {
    const double h = (hi - lo) / (kPoints - 1);
    int arg = 0;
    double top = -kInf;
    for (int i = 0; i < kPoints; ++i) {
      const double s = score(lo + h * i);
      if (s > top) {
        top = s;
        arg = i;
      }
    }
    best = lo + h * arg;
    if (h <= resolution) break;
    const double new_lo = std::max(lo, best - 2.0 * h);
    const double new_hi = std::min(hi, best + 2.0 * h);
    lo = new_lo;
    hi = new_hi;
  }
  return best;
}

}  // namespace powerutil
