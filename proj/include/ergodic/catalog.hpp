#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ergodic/errors.hpp"
#include "ergodic/model.hpp"

namespace ergodic::catalog {

/// Scale of the default Lyapunov function V(x) = 1 + 0.02 |x|^2. A flatter V
/// than 1 + |x|^2 keeps the p = 2 and exponential recursive-control margins
/// positive for the unit-rate models below.
inline constexpr double kDefaultLyapunovScale = 0.02;

/// Shot-noise parameters for the moment identities of the Levy-driven OU.
struct ShotNoiseParams {
  double theta = 1.0;
  double rate = 1.0;
  double jump_m1 = 1.0;
  double jump_m2 = 1.0;
};

struct Entry {
  std::string key;
  int dim = 1;
  std::optional<DiffusionModel> diffusion;
  std::optional<JumpModel> jump;
  /// b; for jump models the drift of the censored-jump SDE
  VectorField drift;
  LyapunovSpec lyapunov;
  /// Scalar coefficients for the one-dimensional speed-measure oracle.
  std::function<double(double)> drift_1d;
  std::function<double(double)> sigma_1d;
  /// Interval carrying essentially all the invariant mass (1-D entries).
  std::pair<double, double> support_1d{-10.0, 10.0};
  std::optional<ShotNoiseParams> shot_noise;
  /// Known stationary mean and second moment of the first coordinate.
  std::optional<std::pair<double, double>> moments;
};

/// theta = 0 is allowed (Brownian motion, no invariant law) so checkers can be shown failing.
inline Entry ornstein_uhlenbeck(int dim = 1, double theta = 1.0, double sigma = std::sqrt(2.0)) {
  if (dim < 1 || !(theta >= 0.0) || !(sigma >= 0.0)) throw InputError("ou: invalid parameters");
  DiffusionModel m;
  m.dim = dim;
  m.name = "ou";
  m.drift = [theta](const Vector& x) { return Vector(-theta * x); };
  m.diffusion = [dim, sigma](const Vector&) { return Matrix(sigma * Matrix::Identity(dim, dim)); };
  m.correction = [dim](const Vector&) { return CorrectionTensor(dim); };
  m.commutative_noise = true;
  Entry e;
  e.key = "ou";
  e.dim = dim;
  e.drift = m.drift;
  e.diffusion = std::move(m);
  e.lyapunov = quadratic_lyapunov(dim, 1.0, kDefaultLyapunovScale);
  e.drift_1d = [theta](double x) { return -theta * x; };
  e.sigma_1d = [sigma](double) { return sigma; };
  if (theta > 0.0) {
    const double var = sigma * sigma / (2.0 * theta);
    e.support_1d = {-12.0 * std::sqrt(var), 12.0 * std::sqrt(var)};
    e.moments = std::pair{0.0, var};
  }
  return e;
}

/// dX = a (m - X) dt + sigma0 sqrt(X^+) dW
inline Entry cir(double a = 1.0, double mean = 1.0, double sigma0 = 1.0) {
  if (!(a > 0.0) || !(mean > 0.0) || !(sigma0 > 0.0)) throw InputError("cir: invalid parameters");
  DiffusionModel m;
  m.dim = 1;
  m.name = "cir";
  m.drift = [a, mean](const Vector& x) { return Vector(Vector::Constant(1, a * (mean - x(0)))); };
  m.diffusion = [sigma0](const Vector& x) {
    return Matrix(Matrix::Constant(1, 1, sigma0 * std::sqrt(std::max(x(0), 0.0))));
  };
  // d/dx (sigma0 sqrt x) * sigma0 sqrt x = sigma0^2 / 2 on x > 0
  m.correction = [sigma0](const Vector& x) {
    CorrectionTensor h(1);
    h(0, 0, 0) = x(0) > 0.0 ? 0.5 * sigma0 * sigma0 : 0.0;
    return h;
  };
  m.commutative_noise = true;
  Entry e;
  e.key = "cir";
  e.dim = 1;
  e.drift = m.drift;
  e.diffusion = std::move(m);
  e.lyapunov = quadratic_lyapunov(1, 1.0, kDefaultLyapunovScale);
  e.drift_1d = [a, mean](double x) { return a * (mean - x); };
  e.sigma_1d = [sigma0](double x) { return sigma0 * std::sqrt(std::max(x, 0.0)); };
  const double shape = 2.0 * a * mean / (sigma0 * sigma0);
  const double scale = sigma0 * sigma0 / (2.0 * a);
  e.support_1d = {0.0, shape * scale + 40.0 * std::sqrt(shape) * scale + 40.0 * scale};
  e.moments = std::pair{mean, mean * mean + mean * sigma0 * sigma0 / (2.0 * a)};
  return e;
}

/// b(x) = x - |x|^2 x, the gradient flow of |x|^4/4 - |x|^2/2
inline Entry double_well(int dim = 1, double sigma = std::sqrt(2.0)) {
  if (dim < 1 || !(sigma > 0.0)) throw InputError("double_well: invalid parameters");
  DiffusionModel m;
  m.dim = dim;
  m.name = "double_well";
  m.drift = [](const Vector& x) { return Vector(x - x.squaredNorm() * x); };
  m.diffusion = [dim, sigma](const Vector&) { return Matrix(sigma * Matrix::Identity(dim, dim)); };
  m.correction = [dim](const Vector&) { return CorrectionTensor(dim); };
  m.commutative_noise = true;
  Entry e;
  e.key = "double_well";
  e.dim = dim;
  e.drift = m.drift;
  e.diffusion = std::move(m);
  e.lyapunov = quadratic_lyapunov(dim, 1.0, kDefaultLyapunovScale);
  e.drift_1d = [](double x) { return x - x * x * x; };
  e.sigma_1d = [sigma](double) { return sigma; };
  e.support_1d = {-6.0, 6.0};
  return e;
}

/// b(x) = -x V(x)^{a-1} with V(x) = 1 + |x|^2; mean reversion weakens as a -> 0.
inline Entry weak_mean_reverting(int dim = 1, double a = 0.5, double sigma = 1.0) {
  if (dim < 1 || !(a > 0.0 && a <= 1.0) || !(sigma > 0.0)) {
    throw InputError("weak_ou: invalid parameters");
  }
  DiffusionModel m;
  m.dim = dim;
  m.name = "weak_ou";
  m.drift = [a](const Vector& x) { return Vector(-x * std::pow(1.0 + x.squaredNorm(), a - 1.0)); };
  m.diffusion = [dim, sigma](const Vector&) { return Matrix(sigma * Matrix::Identity(dim, dim)); };
  m.correction = [dim](const Vector&) { return CorrectionTensor(dim); };
  m.commutative_noise = true;
  Entry e;
  e.key = "weak_ou";
  e.dim = dim;
  e.drift = m.drift;
  e.diffusion = std::move(m);
  e.lyapunov = quadratic_lyapunov(dim, 1.0, 1.0, PolynomialPsi{1.0}, a);
  e.drift_1d = [a](double x) { return -x * std::pow(1.0 + x * x, a - 1.0); };
  e.sigma_1d = [sigma](double) { return sigma; };
  e.support_1d = a >= 0.5 ? std::pair{-40.0, 40.0} : std::pair{-400.0, 400.0};
  return e;
}

/// dX = -theta X dt + dJ, J compound Poisson with intensity `rate` and jumps of
/// size `jump_size` (mark z = jump size, c(z, x) = z, zeta = 1).
inline Entry shot_noise_ou(double theta = 1.0, double rate = 1.0, double jump_size = 1.0,
                           double q = 1.0) {
  if (!(theta > 0.0) || !(rate >= 0.0)) throw InputError("shot_noise_ou: invalid parameters");
  JumpModel jm;
  jm.dim = 1;
  jm.name = "shot_noise_ou";
  Mark z0 = Vector::Constant(1, jump_size);
  jm.measure = MarkMeasure::from_atoms({{z0, rate}});
  jm.jump_coeff = [](const Mark& z, const Vector&) { return Vector(z); };
  jm.censor = [](const Mark&, const Vector&) { return 1.0; };
  jm.censor_max = 1.0;
  jm.regime_q = q;
  jm.compensator = [rate, jump_size](const Vector&) {
    return Vector(Vector::Constant(1, rate * jump_size));
  };
  jm.truncated_compensator = [rate, jump_size](double, const Vector&) {
    return Vector(Vector::Constant(1, rate * jump_size));
  };
  jm.tau_closed_form = [rate, jump_size](double p, double, const Vector&) {
    return rate * std::pow(std::abs(jump_size), 2.0 * p);
  };
  Entry e;
  e.key = "shot_noise_ou";
  e.dim = 1;
  e.drift = [theta](const Vector& x) { return Vector(-theta * x); };
  e.jump = std::move(jm);
  e.lyapunov = quadratic_lyapunov(1, 1.0, kDefaultLyapunovScale);
  e.shot_noise = ShotNoiseParams{theta, rate, jump_size, jump_size * jump_size};
  const double mu1 = rate * jump_size / theta;
  e.moments = std::pair{mu1, (2.0 * rate * jump_size * mu1 + rate * jump_size * jump_size) / (2.0 * theta)};
  return e;
}

inline std::vector<std::string> keys() {
  return {"ou", "cir", "double_well", "weak_ou", "shot_noise_ou"};
}

/// Builds an entry from its key and named parameters (unknown names rejected).
inline Entry make(const std::string& key, const std::map<std::string, double>& params) {
  auto get = [&](const std::string& name, double dflt) {
    auto it = params.find(name);
    return it == params.end() ? dflt : it->second;
  };
  auto allow = [&](std::initializer_list<const char*> names) {
    for (const auto& [k, v] : params) {
      bool ok = false;
      for (const char* n : names) ok = ok || k == n;
      if (!ok) throw InputError("model '" + key + "' has no parameter '" + k + "'");
    }
  };
  if (key == "ou") {
    allow({"dim", "theta", "sigma"});
    return ornstein_uhlenbeck(static_cast<int>(get("dim", 1)), get("theta", 1.0), get("sigma", std::sqrt(2.0)));
  }
  if (key == "cir") {
    allow({"a", "m", "sigma0"});
    return cir(get("a", 1.0), get("m", 1.0), get("sigma0", 1.0));
  }
  if (key == "double_well") {
    allow({"dim", "sigma"});
    return double_well(static_cast<int>(get("dim", 1)), get("sigma", std::sqrt(2.0)));
  }
  if (key == "weak_ou") {
    allow({"dim", "a", "sigma"});
    return weak_mean_reverting(static_cast<int>(get("dim", 1)), get("a", 0.5), get("sigma", 1.0));
  }
  if (key == "shot_noise_ou") {
    allow({"theta", "rate", "jump_size", "q"});
    return shot_noise_ou(get("theta", 1.0), get("rate", 1.0), get("jump_size", 1.0), get("q", 1.0));
  }
  throw InputError("unknown model '" + key + "'");
}

}  // namespace ergodic::catalog
