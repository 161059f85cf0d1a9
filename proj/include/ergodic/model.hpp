#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ergodic/errors.hpp"
#include "ergodic/linalg.hpp"
#include "ergodic/quadrature.hpp"
#include "ergodic/rng.hpp"

namespace ergodic {

using VectorField = std::function<Vector(const Vector&)>;
using MatrixField = std::function<Matrix(const Vector&)>;
using ScalarField = std::function<double(const Vector&)>;

// ---------------------------------------------------------------------------
// Brownian diffusions
// ---------------------------------------------------------------------------

/// H_{i,j}(x) = sum_l d_{x_l} sigma_i(x) sigma_{l,j}(x), where sigma_i is the
/// i-th column of sigma. Stored as d^3 reals; (k, i, j) is component k of H_{i,j}.
class CorrectionTensor {
 public:
  CorrectionTensor() = default;
  explicit CorrectionTensor(int dim)
      : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim), 0.0) {}

  int dim() const { return dim_; }

  double& operator()(int k, int i, int j) { return data_[index(k, i, j)]; }
  double operator()(int k, int i, int j) const { return data_[index(k, i, j)]; }

  Vector column(int i, int j) const {
    Vector v(dim_);
    for (int k = 0; k < dim_; ++k) v(k) = (*this)(k, i, j);
    return v;
  }

  /// max_{i,j,k} |H_{i,j} - H_{j,i}|_k
  double symmetry_residual() const {
    double r = 0.0;
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) {
        for (int k = 0; k < dim_; ++k) {
          r = std::max(r, std::abs((*this)(k, i, j) - (*this)(k, j, i)));
        }
      }
    }
    return r;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

 private:
  std::size_t index(int k, int i, int j) const {
    return static_cast<std::size_t>((i * dim_ + j) * dim_ + k);
  }

  int dim_ = 0;
  std::vector<double> data_;
};

struct DiffusionModel {
  int dim = 1;
  VectorField drift;
  MatrixField diffusion;
  /// Closed-form Milstein correction. Left empty, the central-difference
  /// fallback below is used (O(h^2) error, h = 1e-5 (1 + |x|)).
  std::function<CorrectionTensor(const Vector&)> correction;
  bool commutative_noise = false;
  std::string name;

  CorrectionTensor correction_at(const Vector& x) const;
};

/// d_{x_l} sigma(x) by central differences, one d x d matrix per l.
inline std::vector<Matrix> diffusion_jacobian_fd(const MatrixField& sigma,
                                                 const Vector& x) {
  const auto d = x.size();
  const double h = 1e-5 * (1.0 + x.norm());
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(d));
  Vector xp = x;
  Vector xm = x;
  for (Eigen::Index l = 0; l < d; ++l) {
    xp(l) = x(l) + h;
    xm(l) = x(l) - h;
    out.push_back((sigma(xp) - sigma(xm)) / (2.0 * h));
    xp(l) = x(l);
    xm(l) = x(l);
  }
  return out;
}

inline CorrectionTensor correction_fd(const MatrixField& sigma, const Vector& x) {
  const int d = static_cast<int>(x.size());
  const Matrix s = sigma(x);
  const auto ds = diffusion_jacobian_fd(sigma, x);
  CorrectionTensor h(d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) {
        double acc = 0.0;
        for (int l = 0; l < d; ++l) acc += ds[static_cast<std::size_t>(l)](k, i) * s(l, j);
        h(k, i, j) = acc;
      }
    }
  }
  return h;
}

inline CorrectionTensor DiffusionModel::correction_at(const Vector& x) const {
  if (correction) return correction(x);
  return correction_fd(diffusion, x);
}

/// sum_{i,j,l} |d_{x_l} sigma_i(x) sigma_{l,j}(x)|^r for r in {1, 2}, with the
/// uncontracted terms taken from finite differences of sigma.
inline double uncontracted_correction_norm(const DiffusionModel& model,
                                           const Vector& x, int power) {
  const int d = model.dim;
  const Matrix s = model.diffusion(x);
  const auto ds = diffusion_jacobian_fd(model.diffusion, x);
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int l = 0; l < d; ++l) {
        const double n = ds[static_cast<std::size_t>(l)].col(i).norm() * std::abs(s(l, j));
        total += power == 1 ? n : n * n;
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Test functionals
// ---------------------------------------------------------------------------

struct CompactSupport {
  Vector center;
  double radius = 0.0;
};
struct PolynomialGrowth {
  double degree = 0.0;
};
struct ExponentialGrowth {
  double lambda = 0.0;
  double p = 0.0;
};
using GrowthClass = std::variant<CompactSupport, PolynomialGrowth, ExponentialGrowth>;

struct TestFunctional {
  std::string label;
  ScalarField eval;
  GrowthClass growth = PolynomialGrowth{0.0};
  /// Derivatives are optional; generator evaluation requires both.
  VectorField gradient;
  MatrixField hessian;

  bool has_derivatives() const { return static_cast<bool>(gradient) && static_cast<bool>(hessian); }
  bool compactly_supported() const { return std::holds_alternative<CompactSupport>(growth); }
};

namespace functionals {

inline TestFunctional constant(int dim, double c) {
  return {"const", [c](const Vector&) { return c; }, PolynomialGrowth{0.0},
          [dim](const Vector&) { return Vector(Vector::Zero(dim)); },
          [dim](const Vector&) { return Matrix(Matrix::Zero(dim, dim)); }};
}

/// x_coord^degree
inline TestFunctional monomial(int dim, int coord, int degree) {
  std::string label = degree == 1 ? "x" : "x^" + std::to_string(degree);
  if (dim > 1) label += "[" + std::to_string(coord) + "]";
  return {label,
          [coord, degree](const Vector& x) { return std::pow(x(coord), degree); },
          PolynomialGrowth{static_cast<double>(degree)},
          [dim, coord, degree](const Vector& x) {
            Vector g = Vector::Zero(dim);
            if (degree > 0) g(coord) = degree * std::pow(x(coord), degree - 1);
            return g;
          },
          [dim, coord, degree](const Vector& x) {
            Matrix h = Matrix::Zero(dim, dim);
            if (degree > 1) h(coord, coord) = degree * (degree - 1) * std::pow(x(coord), degree - 2);
            return h;
          }};
}

inline TestFunctional squared_norm(int dim) {
  return {"|x|^2", [](const Vector& x) { return x.squaredNorm(); }, PolynomialGrowth{2.0},
          [](const Vector& x) { return Vector(2.0 * x); },
          [dim](const Vector&) { return Matrix(2.0 * Matrix::Identity(dim, dim)); }};
}

/// exp(1 - 1 / (1 - |x - c|^2 / r^2)) inside the ball, 0 outside; peak value 1.
inline TestFunctional bump(const Vector& center, double radius, std::string label = {}) {
  if (!(radius > 0.0)) throw InputError("bump: radius must be positive");
  const int dim = static_cast<int>(center.size());
  if (label.empty()) {
    auto g = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", v);
      return std::string(buf);
    };
    label = "bump(";
    for (int i = 0; i < dim; ++i) label += (i ? "," : "") + g(center(i));
    label += ";" + g(radius) + ")";
  }
  const double r2 = radius * radius;
  auto s_of = [center, r2](const Vector& x) { return (x - center).squaredNorm() / r2; };
  return {label,
          [s_of](const Vector& x) {
            const double s = s_of(x);
            return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
          },
          CompactSupport{center, radius},
          [s_of, center, r2, dim](const Vector& x) {
            const double s = s_of(x);
            if (s >= 1.0) return Vector(Vector::Zero(dim));
            const double f = std::exp(1.0 - 1.0 / (1.0 - s));
            const double g1 = -1.0 / ((1.0 - s) * (1.0 - s));
            return Vector(f * g1 * 2.0 * (x - center) / r2);
          },
          [s_of, center, r2, dim](const Vector& x) {
            const double s = s_of(x);
            if (s >= 1.0) return Matrix(Matrix::Zero(dim, dim));
            const double f = std::exp(1.0 - 1.0 / (1.0 - s));
            const double g1 = -1.0 / ((1.0 - s) * (1.0 - s));
            const double g2 = -2.0 / ((1.0 - s) * (1.0 - s) * (1.0 - s));
            const Vector ds = 2.0 * (x - center) / r2;
            return Matrix(f * (g1 * g1 + g2) * ds * ds.transpose() +
                          f * g1 * (2.0 / r2) * Matrix::Identity(dim, dim));
          }};
}

}  // namespace functionals

// ---------------------------------------------------------------------------
// Censored jump models
// ---------------------------------------------------------------------------

using Mark = Vector;

struct MarkAtom {
  Mark z;
  double mass = 0.0;
};

/// One-dimensional mark space with a Lebesgue density. `support(gamma)` gives
/// the interval F_gamma (ends may be infinite).
struct MarkDensity1D {
  std::function<double(double)> density;
  std::function<std::pair<double, double>(double)> support;
};

/// The jump measure pi on F together with the truncation family F_gamma.
struct MarkMeasure {
  enum class Kind { finite, sigma_finite };
  Kind kind = Kind::finite;
  /// pi(F); +inf allowed for sigma-finite measures.
  double total_mass = 0.0;
  /// gamma -> pi(F_gamma). Ignored for finite measures (F_gamma = F).
  std::function<double(double)> truncated_mass;
  /// Draw from pi restricted to F_gamma, normalized.
  std::function<Mark(double, Rng&)> sample;
  /// Optional exact descriptions used for deterministic integration.
  std::vector<MarkAtom> atoms;
  std::optional<MarkDensity1D> density;

  bool finite_total() const { return std::isfinite(total_mass); }

  double mass(double gamma) const {
    if (kind == Kind::finite || gamma <= 0.0 || !truncated_mass) return total_mass;
    return truncated_mass(gamma);
  }

  bool deterministic_quadrature() const { return !atoms.empty() || density.has_value(); }

  static MarkMeasure from_atoms(std::vector<MarkAtom> atoms) {
    MarkMeasure m;
    m.kind = Kind::finite;
    double total = 0.0;
    for (const auto& a : atoms) {
      if (a.mass < 0.0) throw InputError("MarkMeasure: negative atom mass");
      total += a.mass;
    }
    m.total_mass = total;
    std::vector<double> w;
    for (const auto& a : atoms) w.push_back(a.mass);
    auto dist = std::make_shared<std::discrete_distribution<std::size_t>>(w.begin(), w.end());
    auto pts = std::make_shared<std::vector<MarkAtom>>(atoms);
    m.sample = [dist, pts](double, Rng& rng) { return (*pts)[(*dist)(rng)].z; };
    m.atoms = std::move(atoms);
    return m;
  }
};

struct JumpModel {
  int dim = 1;
  /// c(z, x)
  std::function<Vector(const Mark&, const Vector&)> jump_coeff;
  /// zeta(z, x) in [0, censor_max]
  std::function<double(const Mark&, const Vector&)> censor;
  double censor_max = 1.0;
  MarkMeasure measure;
  double regime_q = 1.0;
  /// Optional closed forms: int_F c zeta dpi, int_{F_gamma} c zeta dpi, tau_{p,gamma}.
  VectorField compensator;
  std::function<Vector(double, const Vector&)> truncated_compensator;
  std::function<double(double, double, const Vector&)> tau_closed_form;
  std::string name;
};

template <typename T>
struct IntegralEstimate {
  T value;
  double std_error = 0.0;
  std::string method;
};

/// int_{F_gamma} g(z) pi(dz). Atoms are summed exactly, 1-D densities use
/// Gauss-Legendre with `nodes` points, anything else Monte Carlo with `nodes`
/// samples from the normalized truncated measure (fixed internal seed).
template <typename T>
IntegralEstimate<T> integrate_marks(const MarkMeasure& pi, double gamma,
                                    const std::function<T(const Mark&)>& g,
                                    T zero, int nodes = 1024,
                                    std::uint64_t seed = 0x5eedULL) {
  if (!pi.atoms.empty()) {
    T acc = zero;
    for (const auto& a : pi.atoms) acc = acc + a.mass * g(a.z);
    return {acc, 0.0, "atoms"};
  }
  if (pi.density) {
    auto [lo, hi] = pi.density->support(pi.kind == MarkMeasure::Kind::finite ? 0.0 : gamma);
    T acc = zero;
    Mark z(1);
    for (const auto& [node, w] : quadrature::mapped_nodes(lo, hi, nodes)) {
      const double dens = pi.density->density(node);
      if (dens == 0.0 || w == 0.0 || !std::isfinite(w)) continue;
      z(0) = node;
      acc = acc + (w * dens) * g(z);
    }
    return {acc, 0.0, "gauss-legendre"};
  }
  const double mass = pi.mass(gamma);
  if (!std::isfinite(mass)) {
    throw UnsupportedConfiguration(
        "integrate_marks: infinite truncated mass and no deterministic description");
  }
  if (!pi.sample) throw UnsupportedConfiguration("integrate_marks: measure has no sampler");
  Rng rng = make_rng(seed, 0);
  T sum = zero;
  double sq = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const T v = g(pi.sample(gamma, rng));
    sum = sum + v;
    if constexpr (std::is_same_v<T, double>) {
      sq += v * v;
    } else {
      sq += v.squaredNorm();
    }
  }
  const double n = static_cast<double>(nodes);
  T mean = (1.0 / n) * sum;
  double mean_sq_norm;
  if constexpr (std::is_same_v<T, double>) {
    mean_sq_norm = mean * mean;
  } else {
    mean_sq_norm = mean.squaredNorm();
  }
  const double var = std::max(0.0, sq / n - mean_sq_norm);
  return {mass * mean, mass * std::sqrt(var / n), "monte-carlo"};
}

/// Sample count for mark integrals that have neither atoms nor a 1-D density.
inline constexpr int kMonteCarloMarks = 10000;

inline Vector compensator_full(const JumpModel& jm, const Vector& x, int nodes = 1024) {
  if (jm.compensator) return jm.compensator(x);
  const bool sampled = jm.measure.finite_total() && static_cast<bool>(jm.measure.sample);
  if (!jm.measure.deterministic_quadrature() && !sampled) {
    throw ConfigurationError("jump model '" + jm.name +
                             "' has no closed-form compensator and no usable quadrature");
  }
  std::function<Vector(const Mark&)> g = [&](const Mark& z) {
    return Vector(jm.jump_coeff(z, x) * jm.censor(z, x));
  };
  const int n = jm.measure.deterministic_quadrature() ? nodes : kMonteCarloMarks;
  return integrate_marks<Vector>(jm.measure, 0.0, g, Vector::Zero(jm.dim), n).value;
}

inline Vector compensator_truncated(const JumpModel& jm, double gamma, const Vector& x,
                                    int nodes = 1024) {
  if (jm.measure.kind == MarkMeasure::Kind::finite) return compensator_full(jm, x, nodes);
  if (jm.truncated_compensator) return jm.truncated_compensator(gamma, x);
  const bool sampled = std::isfinite(jm.measure.mass(gamma)) && static_cast<bool>(jm.measure.sample);
  if (!jm.measure.deterministic_quadrature() && !sampled) {
    throw ConfigurationError("jump model '" + jm.name +
                             "' has no truncated compensator and no usable quadrature");
  }
  std::function<Vector(const Mark&)> g = [&](const Mark& z) {
    return Vector(jm.jump_coeff(z, x) * jm.censor(z, x));
  };
  const int n = jm.measure.deterministic_quadrature() ? nodes : kMonteCarloMarks;
  return integrate_marks<Vector>(jm.measure, gamma, g, Vector::Zero(jm.dim), n).value;
}

// ---------------------------------------------------------------------------
// Lyapunov apparatus
// ---------------------------------------------------------------------------

/// psi(y) = y^p
struct PolynomialPsi {
  double p = 1.0;
};
/// psi(y) = exp(lambda y^p), p <= 1/2
struct ExponentialPsi {
  double lambda = 0.0;
  double p = 0.5;
};
using PsiShape = std::variant<PolynomialPsi, ExponentialPsi>;

struct LyapunovSpec {
  ScalarField value;
  VectorField gradient;
  MatrixField hessian;
  double v_star = 1.0;
  double c_v = 0.0;
  double hess_sup = 0.0;
  double sqrt_v_lip = 0.0;
  PsiShape psi = PolynomialPsi{1.0};
  /// phi(y) = y^a, a in (0, 1]
  double phi_exponent = 1.0;

  double phi(double y) const { return std::pow(y, phi_exponent); }

  double psi_p() const {
    return std::visit([](const auto& s) { return s.p; }, psi);
  }

  double psi_value(double y) const {
    if (const auto* pol = std::get_if<PolynomialPsi>(&psi)) return std::pow(y, pol->p);
    const auto& e = std::get<ExponentialPsi>(psi);
    return std::exp(e.lambda * std::pow(y, e.p));
  }

  double psi_prime(double y) const {
    if (const auto* pol = std::get_if<PolynomialPsi>(&psi)) {
      return pol->p * std::pow(y, pol->p - 1.0);
    }
    const auto& e = std::get<ExponentialPsi>(psi);
    return e.lambda * e.p * std::pow(y, e.p - 1.0) * psi_value(y);
  }

  /// psi''(y) / psi'(y), in closed form to avoid overflow of psi itself.
  double psi_curvature_ratio(double y) const {
    if (const auto* pol = std::get_if<PolynomialPsi>(&psi)) return (pol->p - 1.0) / y;
    const auto& e = std::get<ExponentialPsi>(psi);
    return e.lambda * e.p * std::pow(y, e.p - 1.0) + (e.p - 1.0) / y;
  }
};

/// V(x) = v0 + scale |x|^2 with its exact constants.
inline LyapunovSpec quadratic_lyapunov(int dim, double v0 = 1.0, double scale = 1.0,
                                       PsiShape psi = PolynomialPsi{1.0},
                                       double phi_exponent = 1.0) {
  if (!(v0 > 0.0) || !(scale > 0.0)) {
    throw InputError("quadratic_lyapunov: v0 and scale must be positive");
  }
  LyapunovSpec s;
  s.value = [v0, scale](const Vector& x) { return v0 + scale * x.squaredNorm(); };
  s.gradient = [scale](const Vector& x) { return Vector(2.0 * scale * x); };
  s.hessian = [dim, scale](const Vector&) { return Matrix(2.0 * scale * Matrix::Identity(dim, dim)); };
  s.v_star = v0;
  s.c_v = 4.0 * scale;
  s.hess_sup = 2.0 * scale;
  s.sqrt_v_lip = std::sqrt(scale);
  s.psi = psi;
  s.phi_exponent = phi_exponent;
  return s;
}

// ---------------------------------------------------------------------------
// Sampling grids
// ---------------------------------------------------------------------------

/// Points at each radius along `directions` unit directions (deduplicated to
/// +/- e_1 in d = 1, evenly spaced angles in d = 2, seeded uniform directions
/// otherwise), plus the origin when requested.
inline std::vector<Vector> log_radial_grid(int dim,
                                           const std::vector<double>& radii = {1.0, 10.0, 100.0, 1000.0},
                                           int directions = 64, bool include_origin = true,
                                           std::uint64_t seed = 7) {
  if (dim < 1) throw InputError("log_radial_grid: dimension must be positive");
  std::vector<Vector> dirs;
  if (dim == 1) {
    dirs.push_back(Vector::Constant(1, 1.0));
    dirs.push_back(Vector::Constant(1, -1.0));
  } else if (dim == 2) {
    for (int k = 0; k < directions; ++k) {
      const double a = 2.0 * std::numbers::pi * k / directions;
      Vector v(2);
      v << std::cos(a), std::sin(a);
      dirs.push_back(v);
    }
  } else {
    Rng rng = make_rng(seed, 1);
    std::normal_distribution<double> n01;
    for (int k = 0; k < directions; ++k) {
      Vector v(dim);
      for (int i = 0; i < dim; ++i) v(i) = n01(rng);
      dirs.push_back(v.normalized());
    }
  }
  std::vector<Vector> out;
  if (include_origin) out.push_back(Vector::Zero(dim));
  for (double r : radii) {
    for (const auto& u : dirs) out.push_back(r * u);
  }
  return out;
}

/// Default verification grid: origin, then radii 10^{k/4} for k = -8..12 along
/// the log-radial directions. Denser than the four decades of the coarse grid
/// so that interior minima of margins are not skipped.
inline std::vector<Vector> verification_grid(int dim, int directions = 64) {
  std::vector<double> radii;
  for (int k = -8; k <= 12; ++k) radii.push_back(std::pow(10.0, k / 4.0));
  return log_radial_grid(dim, radii, directions, true);
}

// ---------------------------------------------------------------------------
// Generators and validation
// ---------------------------------------------------------------------------

/// <b, grad f> + 1/2 Tr[sigma sigma^* D^2 f]
inline double diffusion_generator_apply(const DiffusionModel& model, const TestFunctional& f,
                                        const Vector& x) {
  if (!f.has_derivatives()) throw InputError("diffusion_generator_apply: '" + f.label + "' has no derivatives");
  if (x.size() != model.dim) throw InputError("diffusion_generator_apply: point dimension mismatch");
  const Vector g = f.gradient(x);
  const Matrix h = f.hessian(x);
  if (g.size() != model.dim || h.rows() != model.dim || h.cols() != model.dim) {
    throw InputError("diffusion_generator_apply: functional '" + f.label + "' has the wrong dimension");
  }
  const Matrix s = model.diffusion(x);
  return model.drift(x).dot(g) + 0.5 * ((s * s.transpose()).cwiseProduct(h)).sum();
}

struct GeneratorValue {
  double value = 0.0;
  double std_error = 0.0;
};

/// <b, grad f> + int_F (f(x + c(z,x)) - f(x)) zeta(z,x) pi(dz).
/// For sigma-finite pi the integral runs over F_gamma with gamma = truncation;
/// without a truncation budget that case is unsupported.
inline GeneratorValue jump_generator_apply(const JumpModel& jm, const VectorField& drift,
                                           const TestFunctional& f, const Vector& x,
                                           int quad_nodes = 1024,
                                           std::optional<double> truncation = std::nullopt) {
  if (!f.gradient) throw InputError("jump_generator_apply: '" + f.label + "' has no gradient");
  if (x.size() != jm.dim) throw InputError("jump_generator_apply: point dimension mismatch");
  if (quad_nodes < 1) throw InputError("jump_generator_apply: quad_nodes must be positive");
  double gamma = 0.0;
  if (jm.measure.kind == MarkMeasure::Kind::sigma_finite) {
    if (!truncation || !(*truncation > 0.0)) {
      if (!jm.measure.finite_total() || !jm.measure.deterministic_quadrature()) {
        throw UnsupportedConfiguration(
            "jump_generator_apply: sigma-finite measure without a truncation budget");
      }
    } else {
      gamma = *truncation;
    }
  }
  const double drift_term = drift ? drift(x).dot(f.gradient(x)) : 0.0;
  const double fx = f.eval(x);
  std::function<double(const Mark&)> g = [&](const Mark& z) {
    const double zeta = jm.censor(z, x);
    if (zeta == 0.0) return 0.0;
    return (f.eval(x + jm.jump_coeff(z, x)) - fx) * zeta;
  };
  const auto est = integrate_marks<double>(jm.measure, gamma, g, 0.0, quad_nodes);
  return {drift_term + est.value, est.std_error};
}

struct ModelReport {
  bool finite = true;
  std::optional<Vector> first_nonfinite;
  double commutativity_residual = 0.0;
  std::optional<Vector> commutativity_argmax;
  double censor_ratio_max = 0.0;  // max zeta / zeta_max over (z, x) samples
  bool passes() const { return finite && censor_ratio_max <= 1.0; }
};

inline ModelReport validate_model(const DiffusionModel& model, const std::vector<Vector>& grid) {
  if (grid.empty()) throw InputError("validate_model: empty grid");
  ModelReport r;
  for (const auto& x : grid) {
    const Vector b = model.drift(x);
    const Matrix s = model.diffusion(x);
    const CorrectionTensor h = model.correction_at(x);
    const bool ok = b.allFinite() && s.allFinite() && h.all_finite();
    if (!ok && r.finite) {
      r.finite = false;
      r.first_nonfinite = x;
    }
    if (ok && model.commutative_noise) {
      const double res = h.symmetry_residual();
      if (res > r.commutativity_residual || !r.commutativity_argmax) {
        r.commutativity_residual = std::max(r.commutativity_residual, res);
        r.commutativity_argmax = x;
      }
    }
  }
  return r;
}

inline ModelReport validate_model(const JumpModel& jm, const std::vector<Vector>& grid,
                                  int mark_samples = 64, std::uint64_t seed = 11) {
  if (grid.empty()) throw InputError("validate_model: empty grid");
  ModelReport r;
  std::vector<Mark> marks;
  for (const auto& a : jm.measure.atoms) marks.push_back(a.z);
  if (marks.empty() && jm.measure.sample) {
    Rng rng = make_rng(seed, 0);
    const double g = jm.measure.kind == MarkMeasure::Kind::finite ? 0.0 : 1e-3;
    for (int i = 0; i < mark_samples; ++i) marks.push_back(jm.measure.sample(g, rng));
  }
  for (const auto& x : grid) {
    for (const auto& z : marks) {
      const Vector c = jm.jump_coeff(z, x);
      const double zeta = jm.censor(z, x);
      if ((!c.allFinite() || !std::isfinite(zeta)) && r.finite) {
        r.finite = false;
        r.first_nonfinite = x;
      }
      if (jm.censor_max > 0.0) r.censor_ratio_max = std::max(r.censor_ratio_max, zeta / jm.censor_max);
    }
  }
  return r;
}

struct LyapunovReport {
  double min_v_minus_vstar = std::numeric_limits<double>::infinity();
  double max_grad_ratio = 0.0;   // max |grad V|^2 / (C_V V)
  double max_hess_norm = 0.0;    // max spectral norm of D^2 V
  std::vector<double> min_v_by_radius;  // should grow without bound
  bool exp_p_valid = true;
  bool passes() const {
    bool growing = true;
    for (std::size_t i = 1; i < min_v_by_radius.size(); ++i) {
      growing = growing && min_v_by_radius[i] > min_v_by_radius[i - 1];
    }
    return min_v_minus_vstar >= 0.0 && max_grad_ratio <= 1.0 + 1e-12 && growing && exp_p_valid;
  }
};

inline LyapunovReport validate_lyapunov(const LyapunovSpec& spec, const std::vector<Vector>& grid,
                                        int dim, const std::vector<double>& radii = {1.0, 10.0, 100.0, 1000.0}) {
  if (grid.empty()) throw InputError("validate_lyapunov: empty grid");
  LyapunovReport r;
  for (const auto& x : grid) {
    const double v = spec.value(x);
    r.min_v_minus_vstar = std::min(r.min_v_minus_vstar, v - spec.v_star);
    const double g2 = spec.gradient(x).squaredNorm();
    if (spec.c_v > 0.0) {
      r.max_grad_ratio = std::max(r.max_grad_ratio, g2 / (spec.c_v * v));
    } else if (g2 > 0.0) {
      r.max_grad_ratio = std::numeric_limits<double>::infinity();
    }
    r.max_hess_norm = std::max(r.max_hess_norm, linalg::spectral_norm_symmetric(spec.hessian(x)));
  }
  for (double rad : radii) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& x : log_radial_grid(dim, {rad}, 64, false)) m = std::min(m, spec.value(x));
    r.min_v_by_radius.push_back(m);
  }
  if (const auto* e = std::get_if<ExponentialPsi>(&spec.psi)) {
    r.exp_p_valid = e->p >= 0.0 && e->p <= 0.5;
  }
  return r;
}

}  // namespace ergodic
