#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ergodic/catalog.hpp"
#include "ergodic/schemes.hpp"

using namespace ergodic;

namespace {

DiffusionModel scalar_model(std::function<double(double)> b, std::function<double(double)> s,
                            std::function<double(double)> h = nullptr) {
  DiffusionModel m;
  m.dim = 1;
  m.drift = [b](const Vector& x) { return Vector(Vector::Constant(1, b(x(0)))); };
  m.diffusion = [s](const Vector& x) { return Matrix(Matrix::Constant(1, 1, s(x(0)))); };
  if (h) {
    m.correction = [h](const Vector& x) {
      CorrectionTensor t(1);
      t(0, 0, 0) = h(x(0));
      return t;
    };
  }
  m.commutative_noise = true;
  return m;
}

Vector v1(double x) { return Vector::Constant(1, x); }

JumpModel atom_jump(double mass, double size, double zeta, double q, double zeta_max = 1.0) {
  JumpModel jm;
  jm.dim = 1;
  jm.measure = MarkMeasure::from_atoms({{v1(size), mass}});
  jm.jump_coeff = [](const Mark& z, const Vector&) { return Vector(z); };
  jm.censor = [zeta](const Mark&, const Vector&) { return zeta; };
  jm.censor_max = zeta_max;
  jm.regime_q = q;
  return jm;
}

}  // namespace

TEST(Euler, FrozenModel) {
  const auto m = scalar_model([](double) { return 0.0; }, [](double) { return 0.0; });
  EXPECT_EQ(euler_step(m, v1(2.5), 0.3, v1(1.7))(0), 2.5);
}

TEST(Euler, DeterministicDrift) {
  const auto m = scalar_model([](double x) { return -x; }, [](double) { return 0.0; });
  EXPECT_DOUBLE_EQ(euler_step(m, v1(1.0), 0.5, v1(0.3))(0), 0.5);
}

TEST(Euler, PureNoise) {
  const auto m = scalar_model([](double) { return 0.0; }, [](double) { return 2.0; });
  EXPECT_DOUBLE_EQ(euler_step(m, v1(0.0), 0.25, v1(1.0))(0), 1.0);
}

TEST(Euler, NonFiniteCoefficientFaults) {
  const auto m = scalar_model([](double) { return NAN; }, [](double) { return 1.0; });
  try {
    euler_step(m, v1(0.7), 0.1, v1(0.0));
    FAIL();
  } catch (const NumericFault& f) {
    EXPECT_EQ(f.state()(0), 0.7);
    EXPECT_EQ(f.step(), 0.1);
  }
}

TEST(Milstein, LinearNoiseUnitIncrement) {
  const auto m = scalar_model([](double) { return 0.0; }, [](double x) { return x; }, [](double x) { return x; });
  const Vector u = v1(1.0);
  Matrix w(1, 1);
  w(0, 0) = 0.5 * (1.0 - 1.0);
  EXPECT_DOUBLE_EQ(milstein_step(m, v1(1.0), 1.0, u, w)(0), 2.0);
}

TEST(Milstein, LinearNoiseZeroIncrement) {
  const auto m = scalar_model([](double) { return 0.0; }, [](double x) { return x; }, [](double x) { return x; });
  Matrix w(1, 1);
  w(0, 0) = 0.5 * (0.0 - 1.0);
  EXPECT_DOUBLE_EQ(milstein_step(m, v1(1.0), 1.0, v1(0.0), w)(0), 0.5);
}

TEST(Milstein, FiniteDifferenceCorrectionFallback) {
  // no closed-form correction: sigma(x) = x gives H = x by central differences
  const auto m = scalar_model([](double) { return 0.0; }, [](double x) { return x; });
  Matrix w(1, 1);
  w(0, 0) = -0.5;
  EXPECT_NEAR(milstein_step(m, v1(1.0), 1.0, v1(0.0), w)(0), 0.5, 1e-8);
}

TEST(Milstein, ConstantNoiseEqualsEuler) {
  auto e = catalog::ornstein_uhlenbeck(2, 0.8, 1.3);
  IncrementGenerator a(9, 0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int k = 0; k < 100; ++k) {
    Vector x(2);
    x << n01(rng), n01(rng);
    const Vector u = a.brownian(2);
    const Matrix w = a.iterated(u);
    const double g = 0.01 + 0.5 * std::abs(n01(rng));
    EXPECT_EQ(milstein_step(*e.diffusion, x, g, u, w), euler_step(*e.diffusion, x, g, u));
  }
}

TEST(Milstein, ModeMismatchIsConfigurationError) {
  auto e = catalog::ornstein_uhlenbeck(2);
  IncrementGenerator exact(1, 0, IncrementMode::gaussian, LevyAreaMode::exact_1d);
  EXPECT_THROW(milstein_step(*e.diffusion, Vector::Zero(2), 0.1, exact), ConfigurationError);
  DiffusionModel m = *e.diffusion;
  m.commutative_noise = false;
  IncrementGenerator comm(1, 0, IncrementMode::gaussian, LevyAreaMode::commutative);
  EXPECT_THROW(milstein_step(m, Vector::Zero(2), 0.1, comm), ConfigurationError);
  IncrementGenerator sub(1, 0, IncrementMode::gaussian, LevyAreaMode::centered_substitute);
  EXPECT_NO_THROW(milstein_step(m, Vector::Zero(2), 0.1, sub));
}

TEST(Increments, MomentMatchingBothModes) {
  const int n = 1000000;
  for (auto mode : {IncrementMode::gaussian, IncrementMode::rademacher}) {
    IncrementGenerator g(42, 3, mode);
    double s0 = 0, s1 = 0, s00 = 0, s11 = 0, s01 = 0;
    for (int k = 0; k < n; ++k) {
      const Vector u = g.brownian(2);
      s0 += u(0);
      s1 += u(1);
      s00 += u(0) * u(0);
      s11 += u(1) * u(1);
      s01 += u(0) * u(1);
    }
    const double se = 1.0 / std::sqrt(n);
    EXPECT_LT(std::abs(s0 / n), 4 * se);
    EXPECT_LT(std::abs(s1 / n), 4 * se);
    EXPECT_LT(std::abs(s01 / n), 4 * se);
    // Var(U^2) = 2 for Gaussian, 0 for Rademacher
    EXPECT_LE(std::abs(s00 / n - 1.0), 4 * std::sqrt(2.0) * se + 1e-12);
    EXPECT_LE(std::abs(s11 / n - 1.0), 4 * std::sqrt(2.0) * se + 1e-12);
  }
}

TEST(Increments, ExactIteratedIntegralMoments) {
  const int n = 1000000;
  IncrementGenerator g(5, 0, IncrementMode::gaussian, LevyAreaMode::exact_1d);
  double s = 0, s2 = 0;
  for (int k = 0; k < n; ++k) {
    const double w = g.iterated(g.brownian(1))(0, 0);
    s += w;
    s2 += w * w;
  }
  EXPECT_LT(std::abs(s / n), 4 * std::sqrt(0.5 / n));
  // E W^4 = 60/16, so Var(W^2) = 3.5
  EXPECT_LT(std::abs(s2 / n - 0.5), 4 * std::sqrt(3.5 / n));
}

TEST(Increments, CommutativeMatchesExactInOneDimension) {
  IncrementGenerator a(8, 1, IncrementMode::gaussian, LevyAreaMode::exact_1d);
  IncrementGenerator b(8, 1, IncrementMode::gaussian, LevyAreaMode::commutative);
  for (int k = 0; k < 1000; ++k) {
    const Vector ua = a.brownian(1);
    const Vector ub = b.brownian(1);
    ASSERT_EQ(ua(0), ub(0));
    EXPECT_EQ(a.iterated(ua)(0, 0), b.iterated(ub)(0, 0));
  }
}

TEST(Increments, SubstituteOffDiagonalCentredWithHalfVariance) {
  IncrementGenerator g(77, 0, IncrementMode::gaussian, LevyAreaMode::centered_substitute);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int k = 0; k < n; ++k) {
    const double w = g.iterated(g.brownian(2))(0, 1);
    s += w;
    s2 += w * w;
  }
  EXPECT_LT(std::abs(s / n), 4 * std::sqrt(0.5 / n));
  EXPECT_NEAR(s2 / n, 0.5, 1e-12);
}

TEST(Increments, SameSeedSameStream) {
  IncrementGenerator a(123, 4);
  IncrementGenerator b(123, 4);
  IncrementGenerator c(123, 5);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const double x = a.scalar();
    EXPECT_EQ(x, b.scalar());
    differs = differs || x != c.scalar();
  }
  EXPECT_TRUE(differs);
}

TEST(Euler, OneStepMeanIsExact) {
  const auto m = scalar_model([](double x) { return -x; }, [](double) { return 1.0; });
  IncrementGenerator g(3, 0);
  const double x = 1.7;
  const double gamma = 0.2;
  const int n = 1000000;
  double s = 0;
  for (int k = 0; k < n; ++k) s += euler_step(m, v1(x), gamma, g)(0);
  EXPECT_LT(std::abs(s / n - x * (1 - gamma)), 4 * std::sqrt(gamma / n));
}

TEST(JumpEuler, ZeroCensorIsPureDrift) {
  for (double q : {0.5, 1.0}) {
    auto jm = atom_jump(2.0, 1.0, 0.0, q);
    if (q > 0.5) {
      jm.compensator = [](const Vector&) { return Vector(Vector::Zero(1)); };
    }
    IncrementGenerator g(1, 0);
    const VectorField b = [](const Vector& x) { return Vector(-x); };
    for (int k = 0; k < 50; ++k) EXPECT_DOUBLE_EQ(jump_euler_step(jm, b, v1(2.0), 0.25, g)(0), 1.5);
  }
}

TEST(JumpEuler, ForcedSingleRawJump) {
  auto jm = atom_jump(1.0, 0.8, 1.0, 0.5);
  const VectorField b = [](const Vector& x) { return Vector(-0.5 * x); };
  const std::vector<JumpDraw> draws{{v1(0.8), 0.0}};
  EXPECT_DOUBLE_EQ(jump_euler_step(jm, b, v1(1.0), 1.0, draws)(0), 1.0 - 0.5 + 0.8);
}

TEST(JumpEuler, CompensatedIncrementIsCentred) {
  // finite pi with mass 1.5, jump 0.7, zeta = 0.6 of zeta_max = 1: int c zeta dpi = 0.63
  auto jm = atom_jump(1.5, 0.7, 0.6, 1.0);
  const VectorField b = [](const Vector& x) { return Vector(-x); };
  IncrementGenerator g(19, 0);
  const Vector x = v1(0.4);
  const double gamma = 0.3;
  const double btilde = -0.4 + 0.63;
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int k = 0; k < n; ++k) {
    const double m = jump_euler_step(jm, b, x, gamma, g)(0) - x(0) - gamma * btilde;
    s += m;
    s2 += m * m;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_LT(std::abs(mean), 3 * se);
}

TEST(JumpEuler, RawIncrementMatchesCompoundPoisson) {
  // zeta constant 0.5 below zeta_max 2: accepted rate gamma * 0.5 * pi(F)
  auto jm = atom_jump(3.0, 1.3, 0.5, 0.5, 2.0);
  IncrementGenerator g(23, 0);
  const double gamma = 0.4;
  const int n = 400000;
  double s = 0, s2 = 0;
  for (int k = 0; k < n; ++k) {
    const double j = jump_euler_step(jm, nullptr, v1(0.0), gamma, g)(0);
    s += j;
    s2 += j * j;
  }
  std::mt19937_64 rng(99);
  std::poisson_distribution<int> pois(gamma * 0.5 * 3.0);
  double o = 0, o2 = 0;
  for (int k = 0; k < n; ++k) {
    const double j = 1.3 * pois(rng);
    o += j;
    o2 += j * j;
  }
  const double lam = gamma * 0.5 * 3.0;
  const double mean = lam * 1.3;
  const double m2 = lam * 1.69 + mean * mean;
  // Var J = lam c^2, Var J^2 from the Poisson fourth moment
  const double se1 = std::sqrt(lam * 1.69 / n);
  const double ek4 = lam * (1 + 7 * lam + 6 * lam * lam + lam * lam * lam);
  const double se2 = std::sqrt((std::pow(1.3, 4) * ek4 - m2 * m2) / n);
  EXPECT_LT(std::abs(s / n - mean), 4 * se1);
  EXPECT_LT(std::abs(s2 / n - m2), 4 * se2);
  EXPECT_LT(std::abs(s / n - o / n), 4 * std::sqrt(2.0) * se1);
  EXPECT_LT(std::abs(s2 / n - o2 / n), 4 * std::sqrt(2.0) * se2);
}

TEST(JumpEuler, RegimeSelection) {
  EXPECT_EQ(jump_regime(atom_jump(1, 1, 1, 0.5)), JumpRegime::raw);
  EXPECT_EQ(jump_regime(atom_jump(1, 1, 1, 0.75)), JumpRegime::compensated);
  EXPECT_EQ(jump_regime(atom_jump(1, 1, 1, 1.0)), JumpRegime::compensated);
  EXPECT_EQ(jump_regime(atom_jump(1, 1, 1, 2.0)), JumpRegime::raw);
  JumpModel inf;
  inf.regime_q = 2.0;
  inf.measure.kind = MarkMeasure::Kind::sigma_finite;
  inf.measure.total_mass = std::numeric_limits<double>::infinity();
  EXPECT_EQ(jump_regime(inf), JumpRegime::compensated);
}

TEST(JumpEuler, PoissonOverflowIsResourceError) {
  auto jm = atom_jump(1e12, 1.0, 1.0, 0.5);
  IncrementGenerator g(1, 0);
  EXPECT_THROW(jump_euler_step(jm, nullptr, v1(0.0), 0.1, g), ResourceError);
}

TEST(JumpEuler, MissingCompensatorIsConfigurationError) {
  JumpModel jm;
  jm.dim = 1;
  jm.regime_q = 1.0;
  jm.measure.kind = MarkMeasure::Kind::sigma_finite;
  jm.measure.total_mass = std::numeric_limits<double>::infinity();
  jm.measure.truncated_mass = [](double g) { return 1.0 / g; };
  jm.measure.sample = [](double g, Rng&) { return Mark(Vector::Constant(1, g)); };
  jm.jump_coeff = [](const Mark& z, const Vector&) { return Vector(z); };
  jm.censor = [](const Mark&, const Vector&) { return 1.0; };
  IncrementGenerator g(1, 0);
  EXPECT_THROW(jump_euler_step(jm, nullptr, v1(0.0), 0.1, g), ConfigurationError);
}

namespace {

std::vector<TestFunctional> x_and_square() {
  return {functionals::monomial(1, 0, 1), functionals::monomial(1, 0, 2)};
}

}  // namespace

TEST(Chain, SingleStepSeesInitialPoint) {
  const auto s = Schedule::equal_weights(0.5, 1.0 / 3.0);
  EmpiricalAccumulator acc(1, x_and_square(), false);
  const Stepper step = [](const Vector& x, double) { return Vector(x + v1(10.0)); };
  const auto st = simulate_chain(step, s, v1(1.5), 1, {&acc});
  EXPECT_EQ(acc.value(0), 1.5);
  EXPECT_EQ(acc.H(), s.eta(1));
  EXPECT_EQ(st.x(0), 11.5);
  ASSERT_EQ(acc.trace().size(), 1u);
  EXPECT_EQ(acc.trace()[0].n, 1u);
}

TEST(Chain, FrozenTwoSteps) {
  const auto s = Schedule::polynomial(0.5, 0.5, 1.0, 0.25);
  EmpiricalAccumulator acc(1, x_and_square(), false);
  const Stepper step = [](const Vector& x, double) { return x; };
  simulate_chain(step, s, v1(-2.0), 2, {&acc});
  EXPECT_EQ(acc.value(0), -2.0);
  EXPECT_NEAR(acc.H(), s.eta(1) + s.eta(2), 1e-15);
}

TEST(Chain, ThreeOuStepsUnrolledByHand) {
  const auto s = Schedule::equal_weights(0.5, 1.0 / 3.0);
  auto e = catalog::ornstein_uhlenbeck();
  IncrementGenerator inc(2024, 7);
  const Stepper step = [&](const Vector& x, double g) { return euler_step(*e.diffusion, x, g, inc); };
  EmpiricalAccumulator acc(1, x_and_square(), false);
  const auto st = simulate_chain(step, s, v1(0.3), 3, {&acc});

  std::mt19937_64 eng = make_rng(2024, 7);
  std::normal_distribution<double> n01;
  double x = 0.3;
  double num = 0, num2 = 0, h = 0;
  double gamma_total = 0;
  for (int k = 1; k <= 3; ++k) {
    const double g = 0.5 * std::pow(k, -1.0 / 3.0);
    num += g * x;
    num2 += g * x * x;
    h += g;
    x = x - g * x + std::sqrt(g) * std::sqrt(2.0) * n01(eng);
    gamma_total += g;
  }
  EXPECT_NEAR(acc.value(0), num / h, 1e-14);
  EXPECT_NEAR(acc.value(1), num2 / h, 1e-14);
  EXPECT_NEAR(st.x(0), x, 1e-14);
  EXPECT_NEAR(st.Gamma, gamma_total, 1e-15);
}

TEST(Chain, FaultCarriesLastValidState) {
  const auto s = Schedule::equal_weights(0.5, 0.5);
  EmpiricalAccumulator acc(1, x_and_square(), false);
  int calls = 0;
  const Stepper step = [&](const Vector& x, double) {
    ++calls;
    return calls == 3 ? Vector(v1(NAN)) : Vector(x + v1(1.0));
  };
  try {
    simulate_chain(step, s, v1(0.0), 10, {&acc});
    FAIL();
  } catch (const NumericFault& f) {
    EXPECT_EQ(f.index(), 3u);
    EXPECT_EQ(f.state()(0), 2.0);
  }
}

TEST(Chain, CheckpointsArePowersOfTwoAndEnd) {
  const auto s = Schedule::equal_weights(0.5, 0.5);
  EmpiricalAccumulator acc(1, x_and_square(), false);
  simulate_chain([](const Vector& x, double) { return x; }, s, v1(0.0), 100, {&acc});
  std::vector<std::uint64_t> ns;
  for (const auto& t : acc.trace()) ns.push_back(t.n);
  EXPECT_EQ(ns, (std::vector<std::uint64_t>{1, 2, 4, 8, 16, 32, 64, 100}));
}

TEST(Chain, DeterministicFinalState) {
  const auto s = Schedule::equal_weights(0.5, 1.0 / 3.0);
  auto e = catalog::cir();
  auto run = [&] {
    IncrementGenerator inc(5, 2, IncrementMode::gaussian, LevyAreaMode::exact_1d);
    const Stepper step = [&](const Vector& x, double g) { return milstein_step(*e.diffusion, x, g, inc); };
    return simulate_chain(step, s, v1(1.0), 20000, {}).x(0);
  };
  EXPECT_EQ(run(), run());
}
