#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/special_functions/expint.hpp>

#include "powerutil/error.hpp"
#include "powerutil/mc_oracle.hpp"

using namespace powerutil;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double se() const { return std::sqrt(var / n); }
  double n = 0.0;
};

template <class F>
Moments moments(int n, F&& draw) {
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw(i);
    s += x;
    s2 += x * x;
  }
  Moments m;
  m.n = n;
  m.mean = s / n;
  m.var = (s2 - n * m.mean * m.mean) / (n - 1);
  return m;
}

LevyTriplet cp_exp_z(double intensity, double rate) {
  return make_triplet(0.0, 0.0, LevyMeasure::compound_poisson_exp(intensity, rate),
                      Truncation::zero);
}

FactorModelSpec constant_model(const LevyTriplet& B, double p, double T) {
  return {IntegratedLevy{B, ConstantFactor{1.0}}, Preferences{p, 1.0, T}, 1.0};
}

SimConfig config(std::int64_t paths, int steps, std::uint64_t seed = 7) {
  SimConfig cfg;
  cfg.n_paths = paths;
  cfg.n_steps = steps;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(Philox, KnownAnswers) {
  using A = std::array<std::uint32_t, 4>;
  EXPECT_EQ(rng::philox4x32({0, 0, 0, 0}, {0, 0}),
            (A{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(rng::philox4x32({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}),
            (A{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(rng::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            {0xa4093822u, 0x299f31d0u}),
            (A{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Stream, DistinctSubstreamsAndRepeatable) {
  rng::Stream a(11, 3, rng::Substream::diffusion);
  rng::Stream b(11, 3, rng::Substream::diffusion);
  rng::Stream c(11, 3, rng::Substream::jumps);
  rng::Stream d(11, 4, rng::Substream::diffusion);
  for (int i = 0; i < 10; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
    EXPECT_NE(x, d.uniform());
  }
}

TEST(Stream, SamplerMoments) {
  rng::Stream s(5, 0, rng::Substream::diffusion);
  const int n = 200000;
  const auto u = moments(n, [&](int) { return s.uniform(); });
  EXPECT_NEAR(u.mean, 0.5, 4 * u.se());
  EXPECT_NEAR(u.var, 1.0 / 12.0, 2e-3);
  const auto z = moments(n, [&](int) { return s.normal(); });
  EXPECT_NEAR(z.mean, 0.0, 4 * z.se());
  EXPECT_NEAR(z.var, 1.0, 0.015);
  for (double mean : {0.3, 3.0, 120.0}) {
    const auto po = moments(n, [&](int) { return static_cast<double>(s.poisson(mean)); });
    EXPECT_NEAR(po.mean, mean, 4 * po.se()) << mean;
    EXPECT_NEAR(po.var / mean, 1.0, 0.02) << mean;
  }
  for (double shape : {0.05, 0.7, 4.0}) {
    const auto g = moments(n, [&](int) { return s.gamma(shape); });
    EXPECT_NEAR(g.mean, shape, 4 * g.se()) << shape;
    EXPECT_NEAR(g.var / shape, 1.0, 0.05) << shape;
  }
}

TEST(JumpSampler, ExplosionLawMean) {
  for (double lambda : {0.25, 2.0}) {
    const double C = -1.5;
    const double theta = -C / (2.0 * lambda);
    const JumpSampler js(LevyMeasure::explosion(C, lambda), 1e-3);
    EXPECT_NEAR(js.rate(), boost::math::expint(2, theta), 1e-14);
    rng::Stream s(1, 0, rng::Substream::jumps);
    // Heavy tail for small theta: compare the mean of min(z, 20).
    const auto m = moments(200000, [&](int) { return std::min(js.sample(s), 20.0); });
    const double truncated_mean =
        (boost::math::expint(1, theta) - boost::math::expint(1, 20.0 * theta) +
         boost::math::expint(2, 20.0 * theta)) /
        boost::math::expint(2, theta);
    EXPECT_NEAR(m.mean, truncated_mean, 4 * m.se()) << lambda;
  }
}

TEST(JumpSampler, GammaTruncationAndCompensation) {
  const double a = 2.0;
  const double r = 3.0;
  const JumpSampler js(LevyMeasure::gamma(a, r), 1e-2);
  EXPECT_LE(js.cutoff(), std::sqrt(2e-6) / r + 1e-15);
  const double eps = js.cutoff();
  EXPECT_NEAR(js.rate(), a * boost::math::expint(1, r * eps), 1e-12);
  // Big-jump mean plus the compensating drift gives the full mean a / r.
  const double big_mean = a * std::exp(-r * eps) / r;
  EXPECT_NEAR(big_mean + js.small_jump_drift(), a / r, 1e-12);
  rng::Stream s(2, 0, rng::Substream::jumps);
  const auto m = moments(200000, [&](int) { return js.sample(s); });
  EXPECT_NEAR(m.mean, big_mean / js.rate(), 4 * m.se());
}

TEST(Subordinator, DriftOnlyIsDeterministic) {
  const auto Z = make_triplet(0.3, 0.0, {}, Truncation::zero);
  const auto grid = time_grid(1.0, 10);
  rng::Stream s(1, 0, rng::Substream::factor);
  for (double inc : simulate_subordinator_increments(Z, grid, s)) EXPECT_NEAR(inc, 0.03, 1e-16);
}

TEST(Subordinator, CompoundPoissonMean) {
  const auto Z = cp_exp_z(2.0, 1.0);
  const auto grid = time_grid(1.0, 4);
  const auto m = moments(100000, [&](int i) {
    rng::Stream s(9, static_cast<std::uint32_t>(i), rng::Substream::factor);
    double total = 0.0;
    for (double inc : simulate_subordinator_increments(Z, grid, s)) {
      EXPECT_GE(inc, 0.0);
      total += inc;
    }
    return total;
  });
  EXPECT_NEAR(m.mean, 2.0, 3 * m.se());
  EXPECT_NEAR(m.var, 4.0, 0.1);  // intensity * E(J^2)
}

TEST(Subordinator, GammaMean) {
  const auto Z = make_triplet(0.0, 0.0, LevyMeasure::gamma(1.5, 4.0), Truncation::zero);
  const auto grid = time_grid(2.0, 20);
  const auto m = moments(50000, [&](int i) {
    rng::Stream s(4, static_cast<std::uint32_t>(i), rng::Substream::factor);
    double total = 0.0;
    for (double inc : simulate_subordinator_increments(Z, grid, s)) total += inc;
    return total;
  });
  EXPECT_NEAR(m.mean, 1.5 / 4.0 * 2.0, 3 * m.se());
  EXPECT_NEAR(m.var, 1.5 / 16.0 * 2.0, 0.01);
}

TEST(OUPath, PureDecayAndNoReversion) {
  const auto grid = time_grid(2.0, 8);
  const std::vector<double> none(8, 0.0);
  const auto y = simulate_ou_path(0.7, 1.3, none, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_NEAR(y[k], 1.3 * std::exp(-0.7 * grid[k]), 1e-15);
  }
  const std::vector<double> dz{0.1, 0.0, 0.2, 0.0, 0.0, 0.3, 0.0, 0.0};
  const auto flat = simulate_ou_path(0.0, 1.0, dz, grid);
  EXPECT_NEAR(flat.back(), 1.6, 1e-15);

  FactorPath fp;
  const OUSubordinator ou{0.0, make_triplet(0.4, 0.0, {}, Truncation::zero), 1.0};
  rng::Stream s(1, 0, rng::Substream::factor);
  fp = simulate_factor(ou, grid, s);
  EXPECT_NEAR(fp.y.back(), 1.8, 1e-15);
  double area = 0.0;
  for (double a : fp.activity) area += a;
  EXPECT_NEAR(area, 2.0 + 0.4 * 2.0 * 2.0 / 2.0, 1e-14);
}

TEST(OUPath, MeanAndActivityMatchAnalytic) {
  const double lambda = 1.2;
  const double y0 = 0.5;
  const double T = 3.0;
  const OUSubordinator ou{lambda, cp_exp_z(2.0, 4.0), y0};  // E Z_1 = 0.5
  const auto grid = time_grid(T, 6);
  const double m = 0.5;
  const double decay = std::exp(-lambda * T);
  const double mean_y = y0 * decay + (1.0 - decay) * m / lambda;
  const double mean_area = y0 * (1.0 - decay) / lambda + m * (T - (1.0 - decay) / lambda) / lambda;
  FactorPath fp;
  double s_y = 0.0, s_y2 = 0.0, s_a = 0.0, s_a2 = 0.0;
  const int n = 100000;
  const FactorProcessSpec factor = ou;
  const FactorSampler sampler(factor, 1e-3);
  for (int i = 0; i < n; ++i) {
    rng::Stream s(3, static_cast<std::uint32_t>(i), rng::Substream::factor);
    sampler.sample(grid, s, fp);
    for (double y : fp.y) ASSERT_GE(y, y0 * decay * (1.0 - 1e-14));
    double a = 0.0;
    for (double v : fp.activity) a += v;
    s_y += fp.y.back();
    s_y2 += fp.y.back() * fp.y.back();
    s_a += a;
    s_a2 += a * a;
  }
  const double my = s_y / n;
  const double ma = s_a / n;
  EXPECT_NEAR(my, mean_y, 3 * std::sqrt((s_y2 / n - my * my) / n));
  EXPECT_NEAR(ma, mean_area, 3 * std::sqrt((s_a2 / n - ma * ma) / n));
}

TEST(Returns, GaussianVariances) {
  const auto grid = time_grid(1.0, 50);
  const double dt = 0.02;
  {
    const FactorModelSpec model{genbs_affine(0.0, 0.0, 1.0, 0.0, ConstantFactor{1.0}),
                                Preferences{}, 1.0};
    rng::Stream f(1, 0, rng::Substream::factor);
    const FactorPath fp = simulate_factor(factor_of(model), grid, f);
    double s2 = 0.0;
    int n = 0;
    for (std::uint32_t i = 0; i < 2000; ++i) {
      rng::Stream d(1, i, rng::Substream::diffusion);
      rng::Stream j(1, i, rng::Substream::jumps);
      const auto rp = simulate_return_increments(model, fp, d, j);
      for (double x : rp.continuous) {
        s2 += x * x;
        ++n;
      }
    }
    EXPECT_NEAR(s2 / n / dt, 1.0, 3 * std::sqrt(2.0 / n));
  }
  {
    const FactorModelSpec model{
        TimeChangedLevy{0.0, make_triplet(0.0, 1.0), 1.0, make_triplet(0.0, 0.0, {}, Truncation::zero), 2.0},
        Preferences{}, 1.0};
    FactorPath fp{grid, std::vector<double>(grid.size(), 2.0), std::vector<double>(50, 2.0 * dt)};
    double s2 = 0.0;
    int n = 0;
    for (std::uint32_t i = 0; i < 2000; ++i) {
      rng::Stream d(2, i, rng::Substream::diffusion);
      rng::Stream j(2, i, rng::Substream::jumps);
      const auto rp = simulate_return_increments(model, fp, d, j);
      for (double x : rp.continuous) {
        s2 += x * x;
        ++n;
      }
    }
    EXPECT_NEAR(s2 / n / dt, 2.0, 3 * 2.0 * std::sqrt(2.0 / n));
  }
}

TEST(Returns, TimeChangeScalesMassIntegrationScalesSize) {
  const auto B = make_triplet(0.0, 0.0, LevyMeasure::kou(3.0, 0.4, 8.0, 6.0));
  const auto Zoff = make_triplet(0.0, 0.0, {}, Truncation::zero);
  const FactorModelSpec tc{TimeChangedLevy{0.0, B, 1.0, Zoff, 2.0}, Preferences{}, 1.0};
  const FactorModelSpec il{IntegratedLevy{B, ConstantFactor{2.0}}, Preferences{}, 1.0};
  const auto grid = time_grid(1.0, 10);
  FactorPath fp{grid, std::vector<double>(grid.size(), 2.0), std::vector<double>(10, 0.2)};
  auto collect = [&](const FactorModelSpec& m) {
    std::vector<double> sizes;
    for (std::uint32_t i = 0; i < 20000; ++i) {
      rng::Stream d(3, i, rng::Substream::diffusion);
      rng::Stream j(3, i, rng::Substream::jumps);
      const auto rp = simulate_return_increments(m, fp, d, j);
      for (double x : rp.jumps) sizes.push_back(std::abs(x));
    }
    return sizes;
  };
  const auto a = collect(tc);
  const auto b = collect(il);
  // Counts: intensity 3 * y for the time change, 3 for the integral.
  EXPECT_NEAR(a.size() / 20000.0, 6.0, 4 * std::sqrt(6.0 / 20000.0));
  EXPECT_NEAR(b.size() / 20000.0, 3.0, 4 * std::sqrt(3.0 / 20000.0));
  const double mean_abs = 0.4 / 8.0 + 0.6 / 6.0;
  const auto ma = moments(static_cast<int>(a.size()), [&](int i) { return a[i]; });
  const auto mb = moments(static_cast<int>(b.size()), [&](int i) { return b[i]; });
  EXPECT_NEAR(ma.mean, mean_abs, 4 * ma.se());
  EXPECT_NEAR(mb.mean, 2.0 * mean_abs, 4 * mb.se());
  EXPECT_GT((mb.mean - ma.mean) / std::hypot(ma.se(), mb.se()), 10.0);
}

TEST(EstimateUtility, ZeroFractionIsExact) {
  const auto model = constant_model(make_triplet(0.1, 0.04), 2.0, 1.0);
  const auto e = estimate_utility(model, [](double) { return 0.0; }, config(1000, 10));
  EXPECT_EQ(e.mean, power_utility(1.0, 2.0));
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.n_effective, 1000);
  EXPECT_EQ(e.n_discarded, 0);
}

TEST(EstimateUtility, ConstantTripletMatchesExpTAlpha) {
  struct Case {
    LevyTriplet B;
    double pi;
    double p;
  };
  const std::vector<Case> cases{
      {make_triplet(0.08, 0.04), 1.0, 2.0},
      {make_triplet(0.05, 0.03, LevyMeasure::kou(2.0, 0.4, 12.0, 7.0, JumpScale::log)), 0.6, 3.0},
      {make_triplet(0.02, 0.0, LevyMeasure::atoms({{-0.3, 1.0}, {0.2, 2.0}})), -1.5, 0.5},
  };
  for (const auto& c : cases) {
    const auto model = constant_model(c.B, c.p, 1.5);
    const auto e = estimate_power_moment(model, [&](double) { return c.pi; }, config(20000, 5));
    const double target = std::exp(1.5 * growth_exponent_alpha(c.B, c.p, c.pi));
    EXPECT_NEAR(e.mean, target, 3 * e.std_error) << c.p;
    EXPECT_GT(e.std_error, 0.0);
  }
}

TEST(EstimateUtility, RuinedPathsAreUnreliable) {
  const auto model =
      constant_model(make_triplet(0.0, 0.0, LevyMeasure::atoms({{-0.5, 1.0}})), 2.0, 1.0);
  try {
    estimate_utility(model, [](double) { return 2.5; }, config(1000, 10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unreliable);
  }
}

TEST(EstimateUtility, ReproducibleAcrossRunsAndWorkers) {
  const FactorModelSpec model{
      BNS{0.02, 0.5, 1.0, cp_exp_z(1.0, 10.0), 0.09}, Preferences{2.0, 1.0, 1.0}, 1.0};
  const auto rule = fraction_rule(model);
  auto cfg = config(3000, 20, 42);
  const auto a = estimate_utility(model, rule, cfg);
  const auto b = estimate_utility(model, rule, cfg);
  cfg.workers = 3;
  const auto c = estimate_utility(model, rule, cfg);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.mean, c.mean);
  EXPECT_EQ(a.std_error, c.std_error);
  cfg.seed = 43;
  EXPECT_NE(estimate_utility(model, rule, cfg).mean, a.mean);
}

TEST(EstimateUtility, AntitheticPreservesMean) {
  const auto model = constant_model(make_triplet(0.08, 0.04), 2.0, 1.0);
  auto rule = [](double) { return 1.0; };
  auto cfg = config(40000, 10, 5);
  const auto plain = estimate_utility(model, rule, cfg);
  cfg.antithetic = true;
  const auto anti = estimate_utility(model, rule, cfg);
  EXPECT_EQ(anti.n_effective, 20000);
  EXPECT_LT(std::abs(anti.mean - plain.mean), 4 * std::hypot(anti.std_error, plain.std_error));
  EXPECT_LT(anti.std_error, plain.std_error);
}

TEST(CompareStrategies, MartingaleIdentitiesOnBrownianTimeChange) {
  const FactorModelSpec model{TimeChangedLevy{0.0, make_triplet(0.3, 1.0), 1.5, cp_exp_z(2.0, 5.0), 0.6},
                              Preferences{2.0, 1.0, 1.0}, 1.0};
  const auto rule = fraction_rule(model);
  const auto c = compare_strategies(
      model, rule, {[](double) { return 0.0; }, [](double) { return 0.35; }}, config(20000, 20));
  EXPECT_NEAR(c.martingale.mean, 1.0, 3 * c.martingale.std_error);
  for (std::size_t j = 0; j < c.supermartingale.size(); ++j) {
    EXPECT_LE(c.supermartingale[j].mean, 1.0 + 3 * c.supermartingale[j].std_error) << j;
    EXPECT_GT(c.gap[j], 0.0) << j;
  }
  EXPECT_TRUE(c.resolved[0]);
}

TEST(ValueTimeChanged, RefusesBeyondExplosion) {
  const TimeChangedLevy m{0.0, make_triplet(1.0, 1.0), 1.0, cp_exp_z(1.0, 0.05), 1.0};
  const Preferences prefs{0.5, 1.0, 5.0};
  try {
    estimate_value_time_changed(m, 2.0, prefs, config(100, 10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::out_of_domain);
  }
}

TEST(GridOracle, MertonKouAndDegenerate) {
  EXPECT_NEAR(grid_oracle_optimal_fraction(make_triplet(0.08, 0.04), 2.0, 1e-6), 1.0, 2e-6);
  EXPECT_NEAR(grid_oracle_optimal_fraction(make_triplet(0.05, 0.09), 0.5, 1e-6), 0.05 / (0.5 * 0.09),
              2e-6);
  const auto kou = make_triplet(0.05, 0.04, LevyMeasure::kou(1.0, 0.5, 10.0, 5.0, JumpScale::log));
  for (double p : {0.5, 3.0}) {
    EXPECT_NEAR(grid_oracle_optimal_fraction(kou, p, 1e-6), optimal_fraction(kou, p).pi, 1e-5)
        << p;
  }
  EXPECT_EQ(grid_oracle_optimal_fraction(LevyTriplet{}, 2.0), 0.0);
}

TEST(SimulatePath, ColumnsAreConsistent) {
  const FactorModelSpec model{
      BNS{0.02, 0.5, 1.0, cp_exp_z(1.0, 10.0), 0.09}, Preferences{2.0, 1.0, 1.0}, 1.0};
  const auto path = simulate_path(model, fraction_rule(model), config(2, 25));
  ASSERT_EQ(path.time.size(), 26u);
  ASSERT_EQ(path.V.size(), 26u);
  EXPECT_EQ(path.V.front(), 1.0);
  EXPECT_EQ(path.S.front(), 1.0);
  for (std::size_t k = 0; k < path.y.size(); ++k) {
    EXPECT_NEAR(path.pi[k], 0.02 / (2.0 * path.y[k]) + 0.25, 1e-12);
    EXPECT_GT(path.V[k], 0.0);
  }
}
