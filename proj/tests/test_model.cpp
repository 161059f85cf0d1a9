#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ergodic/catalog.hpp"
#include "ergodic/model.hpp"

using namespace ergodic;

namespace {

DiffusionModel linear_model(int d, double theta, double sigma) {
  DiffusionModel m;
  m.dim = d;
  m.drift = [theta](const Vector& x) { return Vector(-theta * x); };
  m.diffusion = [d, sigma](const Vector&) { return Matrix(sigma * Matrix::Identity(d, d)); };
  return m;
}

JumpModel unit_atom_jump(double mass, double zeta) {
  JumpModel jm;
  jm.dim = 1;
  jm.measure = MarkMeasure::from_atoms({{Vector::Constant(1, 1.0), mass}});
  jm.jump_coeff = [](const Mark&, const Vector&) { return Vector(Vector::Constant(1, 1.0)); };
  jm.censor = [zeta](const Mark&, const Vector&) { return zeta; };
  jm.censor_max = 1.0;
  return jm;
}

}  // namespace

TEST(DiffusionGenerator, ConstantFunctionalIsAnnihilated) {
  const auto m = linear_model(2, 1.0, 1.3);
  const auto f = functionals::constant(2, 4.0);
  EXPECT_EQ(diffusion_generator_apply(m, f, Vector::Constant(2, 0.7)), 0.0);
}

TEST(DiffusionGenerator, OuSquareAtThree) {
  const auto m = linear_model(1, 1.0, std::sqrt(2.0));
  const auto f = functionals::monomial(1, 0, 2);
  EXPECT_NEAR(diffusion_generator_apply(m, f, Vector::Constant(1, 3.0)), -16.0, 1e-12);
}

TEST(DiffusionGenerator, HalfLaplacianOfSquaredNorm) {
  auto m = linear_model(2, 0.0, 1.0);
  const auto f = functionals::squared_norm(2);
  EXPECT_NEAR(diffusion_generator_apply(m, f, Vector::Constant(2, -5.0)), 2.0, 1e-12);
}

TEST(DiffusionGenerator, DimensionMismatchIsInputError) {
  const auto m = linear_model(2, 1.0, 1.0);
  const auto f = functionals::monomial(1, 0, 2);
  EXPECT_THROW(diffusion_generator_apply(m, f, Vector::Zero(2)), InputError);
}

TEST(DiffusionGenerator, LinearInTheFunctional) {
  DiffusionModel m;
  m.dim = 2;
  m.drift = [](const Vector& x) { return Vector(Vector{{std::sin(x(0)) - x(1), x(0) * x(1)}}); };
  m.diffusion = [](const Vector& x) {
    Matrix s(2, 2);
    s << 1.0 + x(0) * x(0), 0.3, -0.2 * x(1), 0.8;
    return s;
  };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const double a = u(rng);
    const double b = u(rng);
    const auto f = functionals::bump(Vector{{u(rng), u(rng)}}, 2.0 + std::abs(u(rng)));
    const auto g = functionals::monomial(2, k % 2, 1 + k % 3);
    TestFunctional h;
    h.label = "combo";
    h.eval = [&](const Vector& x) { return a * f.eval(x) + b * g.eval(x); };
    h.gradient = [&](const Vector& x) { return Vector(a * f.gradient(x) + b * g.gradient(x)); };
    h.hessian = [&](const Vector& x) { return Matrix(a * f.hessian(x) + b * g.hessian(x)); };
    const Vector x{{u(rng), u(rng)}};
    const double lhs = diffusion_generator_apply(m, h, x);
    const double rhs = a * diffusion_generator_apply(m, f, x) + b * diffusion_generator_apply(m, g, x);
    EXPECT_NEAR(lhs, rhs, 1e-11 * (1.0 + std::abs(rhs)));
  }
}

TEST(JumpGenerator, ZeroCensorLeavesDrift) {
  auto jm = unit_atom_jump(1.0, 0.0);
  const VectorField b = [](const Vector& x) { return Vector(-x); };
  const auto f = functionals::monomial(1, 0, 2);
  const Vector x = Vector::Constant(1, 1.5);
  EXPECT_NEAR(jump_generator_apply(jm, b, f, x).value, -4.5, 1e-12);
}

TEST(JumpGenerator, UnitAtomUnitJump) {
  auto jm = unit_atom_jump(1.0, 1.0);
  const auto f = functionals::monomial(1, 0, 1);
  EXPECT_NEAR(jump_generator_apply(jm, nullptr, f, Vector::Zero(1)).value, 1.0, 1e-15);
}

TEST(JumpGenerator, FiniteDensityOfMassTwo) {
  JumpModel jm;
  jm.dim = 1;
  jm.measure.kind = MarkMeasure::Kind::finite;
  jm.measure.total_mass = 2.0;
  jm.measure.density = MarkDensity1D{[](double z) { return z >= 0.0 && z <= 1.0 ? 2.0 : 0.0; },
                                     [](double) { return std::pair{0.0, 1.0}; }};
  jm.jump_coeff = [](const Mark&, const Vector&) { return Vector(Vector::Constant(1, 1.0)); };
  jm.censor = [](const Mark&, const Vector&) { return 1.0; };
  const VectorField b = [](const Vector& x) { return Vector(-x); };
  const auto f = functionals::monomial(1, 0, 1);
  // exact: 0 + int_0^1 (1 - 0) 2 dz = 2
  EXPECT_NEAR(jump_generator_apply(jm, b, f, Vector::Zero(1)).value, 2.0, 1e-12);
}

TEST(JumpGenerator, SigmaFiniteWithoutBudgetIsUnsupported) {
  JumpModel jm;
  jm.dim = 1;
  jm.measure.kind = MarkMeasure::Kind::sigma_finite;
  jm.measure.total_mass = std::numeric_limits<double>::infinity();
  jm.measure.truncated_mass = [](double g) { return 1.0 / g; };
  jm.measure.sample = [](double, Rng&) { return Mark(Vector::Constant(1, 1.0)); };
  jm.jump_coeff = [](const Mark& z, const Vector&) { return Vector(z); };
  jm.censor = [](const Mark&, const Vector&) { return 1.0; };
  const auto f = functionals::monomial(1, 0, 1);
  EXPECT_THROW(jump_generator_apply(jm, nullptr, f, Vector::Zero(1)), UnsupportedConfiguration);
}

TEST(JumpGenerator, ZeroCensorMatchesDriftOnlyDiffusion) {
  auto jm = unit_atom_jump(3.0, 0.0);
  auto m = linear_model(1, 0.7, 0.0);
  const auto f = functionals::bump(Vector::Constant(1, 0.2), 1.5);
  for (double x = -2.0; x <= 2.0; x += 0.125) {
    const Vector p = Vector::Constant(1, x);
    EXPECT_NEAR(jump_generator_apply(jm, m.drift, f, p).value, diffusion_generator_apply(m, f, p), 1e-14);
  }
}

TEST(ValidateModel, OneDimensionalIsCommutative) {
  auto e = catalog::cir();
  const auto r = validate_model(*e.diffusion, verification_grid(1));
  EXPECT_TRUE(r.finite);
  EXPECT_EQ(r.commutativity_residual, 0.0);
}

TEST(ValidateModel, DiagonalNoiseIsCommutative) {
  DiffusionModel m;
  m.dim = 3;
  m.drift = [](const Vector& x) { return Vector(-x); };
  m.diffusion = [](const Vector& x) {
    Matrix s = Matrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i) s(i, i) = 1.0 + 0.5 * std::sin(x(i));
    return s;
  };
  m.commutative_noise = true;
  const auto r = validate_model(m, log_radial_grid(3, {0.5, 1.0, 3.0}, 16, true));
  EXPECT_LT(r.commutativity_residual, 1e-8);
}

TEST(ValidateModel, NonCommutativeNoiseIsReported) {
  DiffusionModel m;
  m.dim = 2;
  m.drift = [](const Vector& x) { return Vector(-x); };
  m.diffusion = [](const Vector& x) {
    Matrix s(2, 2);
    s << 1.0, x(0), 0.0, 1.0;
    return s;
  };
  m.commutative_noise = true;
  const auto r = validate_model(m, log_radial_grid(2, {1.0}, 8, false));
  EXPECT_GT(r.commutativity_residual, 0.5);
  ASSERT_TRUE(r.commutativity_argmax.has_value());
}

TEST(ValidateModel, CensorRatioWithinBound) {
  JumpModel jm = unit_atom_jump(1.0, 1.0);
  jm.censor = [](const Mark&, const Vector& x) { return 1.0 / (1.0 + x.norm()); };
  const auto r = validate_model(jm, verification_grid(1));
  EXPECT_LE(r.censor_ratio_max, 1.0);
  EXPECT_TRUE(r.passes());
}

TEST(ValidateModel, NonFiniteCoefficientIsFound) {
  DiffusionModel m = linear_model(1, 1.0, 1.0);
  m.drift = [](const Vector& x) { return Vector(Vector::Constant(1, x(0) > 50.0 ? NAN : 0.0)); };
  const auto r = validate_model(m, verification_grid(1));
  EXPECT_FALSE(r.finite);
  ASSERT_TRUE(r.first_nonfinite.has_value());
  EXPECT_GT((*r.first_nonfinite)(0), 50.0);
}

TEST(Correction, FiniteDifferenceMatchesClosedForm) {
  auto e = catalog::cir(1.0, 1.0, 0.8);
  const auto& m = *e.diffusion;
  for (double x : {0.3, 1.0, 4.0}) {
    const Vector p = Vector::Constant(1, x);
    EXPECT_NEAR(correction_fd(m.diffusion, p)(0, 0, 0), m.correction_at(p)(0, 0, 0), 1e-7);
  }
}

TEST(Lyapunov, QuadraticPassesAtRandomPoints) {
  for (int d : {1, 3}) {
    const auto spec = quadratic_lyapunov(d, 1.0, catalog::kDefaultLyapunovScale);
    ASSERT_TRUE(validate_lyapunov(spec, verification_grid(d), d).passes());
    std::mt19937_64 rng(static_cast<unsigned>(d));
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u01;
    for (int k = 0; k < 10000; ++k) {
      Vector x(d);
      for (int i = 0; i < d; ++i) x(i) = n01(rng);
      x *= 1000.0 * std::pow(u01(rng), 1.0 / d) / x.norm();
      const double v = spec.value(x);
      EXPECT_GE(v, spec.v_star);
      EXPECT_LE(spec.gradient(x).squaredNorm(), spec.c_v * v * (1.0 + 1e-12));
    }
  }
}

TEST(Lyapunov, BoundedFunctionFailsGrowth) {
  LyapunovSpec s;
  s.value = [](const Vector& x) { return 2.0 - 1.0 / (1.0 + x.squaredNorm()); };
  s.gradient = [](const Vector& x) { return Vector(2.0 * x / std::pow(1.0 + x.squaredNorm(), 2)); };
  s.hessian = [](const Vector&) { return Matrix(Matrix::Zero(1, 1)); };
  s.v_star = 1.0;
  s.c_v = 1.0;
  // V is nondecreasing but saturates at 2; radii far out eventually tie in double precision
  const auto r = validate_lyapunov(s, verification_grid(1), 1, {1e8, 1e9});
  EXPECT_FALSE(r.passes());
}

TEST(Lyapunov, ExponentialPsiExponentRange) {
  auto s = quadratic_lyapunov(1, 1.0, 1.0, ExponentialPsi{0.1, 0.75});
  EXPECT_FALSE(validate_lyapunov(s, verification_grid(1), 1).passes());
  s.psi = ExponentialPsi{0.1, 0.5};
  EXPECT_TRUE(validate_lyapunov(s, verification_grid(1), 1).passes());
}

TEST(Functionals, BumpVanishesOutsideRadius) {
  const auto f = functionals::bump(Vector{{1.0, -1.0}}, 0.5);
  EXPECT_TRUE(f.compactly_supported());
  EXPECT_EQ(f.eval(Vector{{1.6, -1.0}}), 0.0);
  EXPECT_NEAR(f.eval(Vector{{1.0, -1.0}}), 1.0, 1e-15);
  EXPECT_EQ(f.label, "bump(1,-1;0.5)");
}

TEST(Functionals, BumpDerivativesMatchDifferences) {
  const auto f = functionals::bump(Vector{{0.1, 0.2}}, 1.3);
  const Vector x{{0.4, -0.3}};
  const double h = 1e-5;
  for (int i = 0; i < 2; ++i) {
    Vector e = Vector::Zero(2);
    e(i) = h;
    EXPECT_NEAR(f.gradient(x)(i), (f.eval(x + e) - f.eval(x - e)) / (2 * h), 1e-8);
    const Vector dg = (f.gradient(x + e) - f.gradient(x - e)) / (2 * h);
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(f.hessian(x)(j, i), dg(j), 1e-7);
  }
}

TEST(Catalog, UnknownKeyOrParameterRejected) {
  EXPECT_THROW(catalog::make("nope", {}), InputError);
  EXPECT_THROW(catalog::make("ou", {{"kappa", 1.0}}), InputError);
  EXPECT_EQ(catalog::make("ou", {{"dim", 3}}).dim, 3);
}

TEST(Catalog, CirCorrectionIsHalfSigmaSquared) {
  auto e = catalog::cir(2.0, 1.0, 0.6);
  EXPECT_NEAR(e.diffusion->correction_at(Vector::Constant(1, 2.0))(0, 0, 0), 0.18, 1e-15);
  EXPECT_NEAR(e.moments->second, 1.0 + 0.36 / 4.0, 1e-15);
}
