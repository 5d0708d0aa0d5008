#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "powerutil/error.hpp"
#include "powerutil/merton_solver.hpp"

using namespace powerutil;

namespace {

LevyTriplet kou_log(double b, double c) {
  return make_triplet(b, c, LevyMeasure::kou(3.0, 0.3, 12.0, 8.0, JumpScale::log));
}

// g for an atomic measure, written out term by term.
double atomic_g(double b, double c, const std::vector<Atom>& atoms, double p, double pi) {
  double g = b - p * c * pi;
  for (const auto& a : atoms) {
    g += a.weight * (a.location * std::pow(1.0 + pi * a.location, -p) - truncation(a.location));
  }
  return g;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::config_error;
}

}  // namespace

TEST(AdmissibleInterval, Examples) {
  const auto z = admissible_interval(LevyMeasure::zero());
  EXPECT_EQ(z.lo, -kInf);
  EXPECT_EQ(z.hi, kInf);

  const auto a = admissible_interval(LevyMeasure::atoms({{-0.5, 1.0}, {0.25, 1.0}}));
  EXPECT_EQ(a.lo, -4.0);
  EXPECT_EQ(a.hi, 2.0);
  EXPECT_TRUE(a.lo_open && a.hi_open);
  // 1 + pi x at the atoms, by enumeration.
  for (double pi : {-4.0, -3.999, 0.0, 1.999, 2.0}) {
    const bool ok = (1.0 + pi * -0.5 > 0.0) && (1.0 + pi * 0.25 > 0.0);
    EXPECT_EQ(a.contains(pi), ok) << pi;
  }

  const auto k = LevyMeasure::kou(1.0, 0.5, 10.0, 5.0, JumpScale::log);
  const auto iv = admissible_interval(k);
  EXPECT_EQ(iv.lo, 0.0);
  EXPECT_EQ(iv.hi, 1.0);
  EXPECT_TRUE(condition1(k, 1.0));
  EXPECT_TRUE(condition1(k, 1.0 - 1e-9));
  EXPECT_FALSE(condition1(k, 1.0 + 1e-9));
  EXPECT_FALSE(condition1(k, -1e-9));

  EXPECT_EQ(code_of([] { admissible_interval(LevyMeasure::kou(1.0, 0.5, 10.0, 5.0)); }),
            ErrorCode::inadmissible_model);
  EXPECT_EQ(code_of([] { admissible_interval(LevyMeasure::atoms({{-1.0, 1.0}})); }),
            ErrorCode::inadmissible_model);

  const auto m = admissible_interval(LevyMeasure::atoms({{-0.5, 1.0}}), 1e-9);
  EXPECT_LT(m.hi, 2.0);
  EXPECT_NEAR(m.hi, 2.0, 1e-8);
}

TEST(DriftFunction, Examples) {
  const double mu = 0.07, s2 = 0.09, p = 3.0;
  for (double pi : {-1.0, 0.0, 0.4}) {
    EXPECT_NEAR(drift_function_g(make_triplet(mu, s2), p, pi), mu - p * s2 * pi, 1e-15);
  }
  EXPECT_EQ(drift_function_g(make_triplet(0.0, 1.0), 2.0, 0.0), 0.0);
  const auto t = make_triplet(0.05, 0.04, LevyMeasure::atoms({{-0.1, 0.5}}));
  EXPECT_NEAR(drift_function_g(t, 2.0, 0.0), 0.05, 1e-15);
}

TEST(DriftFunction, AtomicAgainstDirectSum) {
  const std::vector<Atom> atoms{{-0.5, 1.0}, {0.25, 1.0}, {1.6, 0.3}};
  const auto t = make_triplet(0.05, 0.02, LevyMeasure::atoms(atoms));
  for (double pi : {-0.6, -0.1, 0.3, 1.2, 1.9}) {
    const double exact = atomic_g(0.05, 0.02, atoms, 2.5, pi);
    EXPECT_NEAR(drift_function_g(t, 2.5, pi), exact, 1e-14 * (1.0 + std::abs(exact)));
  }
  EXPECT_EQ(code_of([&] { drift_function_g(t, 2.5, 2.0); }), ErrorCode::out_of_domain);
}

TEST(DriftFunction, BoundaryIntegrability) {
  // Mass near -1 of order 1.5: integrable against (1+x)^{-p} only for p < 1.5.
  const auto t = make_triplet(0.1, 0.0, LevyMeasure::kou(1.0, 0.5, 5.0, 1.5, JumpScale::log));
  EXPECT_TRUE(condition2(t, 1.2, 1.0));
  EXPECT_FALSE(condition2(t, 2.0, 1.0));
  EXPECT_TRUE(condition2(t, 2.0, 0.999));
  EXPECT_EQ(code_of([&] { drift_function_g(t, 2.0, 1.0); }), ErrorCode::divergent);
  EXPECT_TRUE(alpha_integrable(t, 2.0, 1.0));
  EXPECT_FALSE(alpha_integrable(t, 3.0, 1.0));
}

TEST(GrowthExponent, MertonValue) {
  const double mu = 0.08, s2 = 0.04;
  for (double p : {0.5, 2.0, 5.0}) {
    const auto t = make_triplet(mu, s2);
    const double pi = mu / (p * s2);
    EXPECT_NEAR(growth_exponent_alpha(t, p, pi), (1.0 - p) * mu * mu / (2.0 * p * s2), 1e-14);
    EXPECT_EQ(growth_exponent_alpha(t, p, 0.0), 0.0);
  }
}

TEST(GrowthExponent, DerivativeMatchesDriftFunction) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.02, 0.98);
  const std::vector<LevyTriplet> corpus{
      kou_log(0.05, 0.04),
      make_triplet(0.02, 0.01, LevyMeasure::normal(2.0, -0.05, 0.1, JumpScale::log)),
      make_triplet(0.1, 0.03, LevyMeasure::atoms({{-0.4, 0.5}, {0.3, 1.0}}))};
  const std::vector<double> ps{0.5, 2.0, 4.0};
  int n = 0;
  for (const auto& t : corpus) {
    for (double p : ps) {
      auto iv = admissible_interval(t.jumps);
      const double lo = std::isfinite(iv.lo) ? iv.lo : -2.0;
      const double hi = std::isfinite(iv.hi) ? iv.hi : 2.0;
      for (int k = 0; k < 3 && n < 27; ++k, ++n) {
        const double pi = lo + (hi - lo) * unit(rng);
        const double h = 1e-5;
        quadrature::Options q;
        q.rel_tol = 1e-13;
        const double d = (growth_exponent_alpha(t, p, pi + h, q) -
                          growth_exponent_alpha(t, p, pi - h, q)) /
                         (2.0 * h);
        const double g = drift_function_g(t, p, pi, q);
        EXPECT_LE(std::abs(d - (1.0 - p) * g), 1e-6 * (1.0 + std::abs((1.0 - p) * g)))
            << "pi=" << pi << " p=" << p;
      }
    }
  }
}

TEST(OptimalFraction, ClosedFormCases) {
  const auto r = optimal_fraction(make_triplet(0.08, 0.04), 2.0);
  EXPECT_NEAR(r.pi, 1.0, 1e-12);
  EXPECT_EQ(r.location, FractionLocation::interior);
  const auto z = optimal_fraction(make_triplet(0.0, 0.04), 5.0);
  EXPECT_EQ(z.pi, 0.0);
  EXPECT_EQ(z.location, FractionLocation::interior);
  const auto d = optimal_fraction(make_triplet(0.0, 0.0), 2.0);
  EXPECT_EQ(d.location, FractionLocation::degenerate);
  EXPECT_EQ(d.pi, 0.0);
}

TEST(OptimalFraction, KouAgainstFlatGrid) {
  const auto t = kou_log(0.06, 0.04);
  const double p = 3.0;
  const auto r = optimal_fraction(t, p);
  ASSERT_EQ(r.location, FractionLocation::interior);
  EXPECT_LE(std::abs(r.g_residual), 1e-10 * r.g_scale);
  // Minimise alpha on 10^5 points of [0, 1] (p > 1).
  const int n = 100000;
  double best = 0.0, best_alpha = kInf;
  for (int i = 0; i <= n; ++i) {
    const double pi = static_cast<double>(i) / n;
    const double a = growth_exponent_alpha(t, p, pi);
    if (a < best_alpha) {
      best_alpha = a;
      best = pi;
    }
  }
  EXPECT_LE(std::abs(r.pi - best), 1e-4);
  EXPECT_LE(r.alpha_value, best_alpha + 1e-14);
}

TEST(OptimalFraction, Boundaries) {
  // Large drift pushes the optimum onto pi = 1; g stays positive there.
  const auto up = make_triplet(2.0, 0.04, LevyMeasure::kou(1.0, 0.5, 10.0, 5.0, JumpScale::log));
  const auto r = optimal_fraction(up, 2.0);
  EXPECT_EQ(r.location, FractionLocation::upper_boundary);
  EXPECT_EQ(r.pi, 1.0);
  EXPECT_GE(r.g_residual, 0.0);
  // Negative excess drift with unbounded upward jumps: short sales are excluded.
  const auto down =
      make_triplet(-0.5, 0.04, LevyMeasure::kou(1.0, 0.5, 10.0, 5.0, JumpScale::log));
  const auto s = optimal_fraction(down, 2.0);
  EXPECT_EQ(s.location, FractionLocation::lower_boundary);
  EXPECT_EQ(s.pi, 0.0);
  EXPECT_LE(s.g_residual, 0.0);
  // An atom at the support edge makes g diverge there, so the root is interior.
  const auto atom = make_triplet(3.0, 0.0, LevyMeasure::atoms({{-0.5, 1.0}, {0.25, 1.0}}));
  const auto a = optimal_fraction(atom, 2.0);
  EXPECT_EQ(a.location, FractionLocation::interior);
  EXPECT_LT(a.pi, 2.0);
  EXPECT_NEAR(atomic_g(3.0, 0.0, {{-0.5, 1.0}, {0.25, 1.0}}, 2.0, a.pi), 0.0, 1e-9);
}

TEST(OptimalFraction, UnboundedLeverageIsRejected) {
  EXPECT_EQ(code_of([] { optimal_fraction(make_triplet(0.1, 0.0), 2.0); }),
            ErrorCode::no_bracket);
  // g tends to b - ∫h K = 0.5 - 0.19 > 0 as pi grows.
  const auto pos = make_triplet(0.5, 0.0, LevyMeasure::compound_poisson_exp(1.0, 5.0));
  EXPECT_EQ(code_of([&] { optimal_fraction(pos, 2.0); }), ErrorCode::no_bracket);
}

TEST(OptimalFraction, OrientationOfAlpha) {
  for (double p : {0.5, 4.0}) {
    const auto t = kou_log(0.05, 0.05);
    const auto r = optimal_fraction(t, p);
    for (int i = 0; i <= 200; ++i) {
      const double a = growth_exponent_alpha(t, p, i / 200.0);
      if (p < 1.0) EXPECT_GE(r.alpha_value, a - 1e-13);
      else EXPECT_LE(r.alpha_value, a + 1e-13);
    }
  }
}

TEST(OptimalFraction, Monotonicity) {
  const auto t = kou_log(0.05, 0.02);
  double prev = kInf;
  for (int i = 0; i <= 100; ++i) {
    const double g = drift_function_g(t, 2.0, i / 100.0);
    EXPECT_LT(g, prev);
    prev = g;
  }
}

TEST(OptimalFraction, TimeChangeScaling) {
  const auto t = kou_log(0.05, 0.03);
  const auto base = optimal_fraction(t, 3.0);
  for (double y : {0.5, 2.0, 10.0}) {
    const auto s = make_triplet(y * t.drift, y * t.diffusion, t.jumps.mass_scaled(y));
    const auto r = optimal_fraction(s, 3.0);
    EXPECT_NEAR(r.pi, base.pi, 1e-9);
    EXPECT_NEAR(r.alpha_value, y * base.alpha_value, 1e-9 * std::abs(y * base.alpha_value));
  }
}

TEST(VerifyConditions, Reports) {
  const auto bs = make_triplet(0.08, 0.04);
  const auto r = verify_conditions(bs, 2.0, optimal_fraction(bs, 2.0).pi);
  EXPECT_TRUE(r.all_pass());
  EXPECT_NEAR(r.cond3_residual, 0.0, 1e-15);

  const auto k = kou_log(0.06, 0.04);
  EXPECT_FALSE(verify_conditions(k, 2.0, 1.5).cond1);
  EXPECT_TRUE(verify_conditions(k, 2.0, optimal_fraction(k, 2.0).pi).all_pass());
  EXPECT_FALSE(verify_conditions(k, 2.0, 0.9).cond3);
}

TEST(PerturbationDrift, MatchesFirstOrderFactor) {
  const auto k = kou_log(0.06, 0.04);
  const auto r = optimal_fraction(k, 2.0);
  EXPECT_NEAR(perturbation_drift(k, 2.0, r.pi, r.pi), 0.0, 1e-13);
  for (double eta : {0.0, 0.3, 0.7, 1.0}) {
    EXPECT_NEAR(perturbation_drift(k, 2.0, r.pi, eta), 0.0, 1e-10);
  }
  const auto up = make_triplet(2.0, 0.04, LevyMeasure::kou(1.0, 0.5, 10.0, 5.0, JumpScale::log));
  const auto b = optimal_fraction(up, 2.0);
  for (int i = 0; i < 10; ++i) {
    const double eta = i / 10.0;
    const double d = perturbation_drift(up, 2.0, b.pi, eta);
    EXPECT_LT(d, 0.0);
    EXPECT_NEAR(d, (eta - b.pi) * b.g_residual, 1e-10 * (1.0 + std::abs(d)));
  }
  EXPECT_EQ(code_of([&] { perturbation_drift(k, 2.0, r.pi, 1.2); }), ErrorCode::out_of_domain);
  // eta may reach an atom-edge that pi itself cannot.
  const auto atoms = make_triplet(0.05, 0.02, LevyMeasure::atoms({{-0.5, 1.0}, {0.25, 1.0}}));
  const auto ra = optimal_fraction(atoms, 2.0);
  EXPECT_NEAR(perturbation_drift(atoms, 2.0, ra.pi, 2.0), (2.0 - ra.pi) * ra.g_residual, 1e-12);
}
