#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ergodic/empirical.hpp"
#include "ergodic/errors.hpp"
#include "ergodic/linalg.hpp"
#include "ergodic/model.hpp"
#include "ergodic/rng.hpp"

namespace ergodic::verify {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct HypothesisMargin {
  std::string id;
  Vector argmin;
  /// min over the grid of (right side - left side); positive means satisfied
  double margin = kInf;
  std::vector<std::pair<std::string, double>> parameters;
  std::string note;
  /// overrides the margin-derived verdict (sublinearity checks)
  std::optional<std::string> verdict_text;
  /// false for inequalities where equality is admissible
  bool strict = true;

  bool holds() const { return strict ? margin > 0.0 : margin >= 0.0; }
  std::string verdict() const {
    if (verdict_text) return *verdict_text;
    return holds() ? "holds" : "fails";
  }
};

namespace detail {

template <typename F>
void grid_min(HypothesisMargin& out, const std::vector<Vector>& grid, F&& margin_at) {
  if (grid.empty()) throw InputError(out.id + ": empty grid");
  for (const auto& x : grid) {
    const double m = margin_at(x);
    if (out.argmin.size() == 0 || m < out.margin || std::isnan(m)) {
      out.margin = std::isnan(m) ? -kInf : m;
      out.argmin = x;
    }
  }
}

inline LyapunovSpec with_polynomial_psi(LyapunovSpec spec, double p) {
  spec.psi = PolynomialPsi{p};
  return spec;
}

inline std::string format_point(const Vector& x) {
  std::ostringstream os;
  os.precision(10);
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ";" : "") << x(i);
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// lambda_psi and the Milstein remainder
// ---------------------------------------------------------------------------

/// Largest eigenvalue (floored at 0) of D^2V + 2 grad V grad V^T psi''(V)/psi'(V).
inline double lambda_psi(const LyapunovSpec& spec, const Vector& x) {
  const double v = spec.value(x);
  if (spec.psi_prime(v) == 0.0) throw InputError("lambda_psi: psi'(V(x)) = 0");
  const Vector g = spec.gradient(x);
  const Matrix m = spec.hessian(x) + 2.0 * spec.psi_curvature_ratio(v) * (g * g.transpose());
  return linalg::positive_top_eigenvalue(m);
}

struct LambdaSup {
  double value = 0.0;
  Vector argmax;
};

inline LambdaSup lambda_sup(const LyapunovSpec& spec, const std::vector<Vector>& grid) {
  if (grid.empty()) throw InputError("lambda_sup: empty grid");
  LambdaSup out{-1.0, grid.front()};
  for (const auto& x : grid) {
    const double l = lambda_psi(spec, x);
    if (l > out.value) out = {l, x};
  }
  return out;
}

/// ||lambda_1|| for p <= 1, ||lambda_p|| for p > 1, with psi_p(y) = y^p.
inline LambdaSup lambda_norm(const LyapunovSpec& spec, double p, const std::vector<Vector>& grid) {
  return lambda_sup(detail::with_polynomial_psi(spec, p <= 1.0 ? 1.0 : p), grid);
}

inline double trace_sigma_sigma(const DiffusionModel& model, const Vector& x) {
  return model.diffusion(x).squaredNorm();
}

inline double chi_p_milstein(double lambda_norm_value, const DiffusionModel& model, const Vector& x, double p) {
  const double tr = trace_sigma_sigma(model, x);
  if (p <= 1.0) return lambda_norm_value * tr;
  return lambda_norm_value * std::pow(2.0, std::max(2.0 * p - 3.0, 0.0)) * tr;
}

inline double chi_p_milstein(const LyapunovSpec& spec, const DiffusionModel& model, const Vector& x, double p,
                             const std::vector<Vector>& grid) {
  return chi_p_milstein(lambda_norm(spec, p, grid).value, model, x, p);
}

// ---------------------------------------------------------------------------
// Recursive-control margins for the Milstein scheme
// ---------------------------------------------------------------------------

inline void liminf_note(HypothesisMargin& h, double a, double alpha, double beta) {
  if (!(alpha > 0.0)) throw InputError(h.id + ": alpha must be positive");
  std::ostringstream os;
  if (a > 0.0) {
    os << "liminf phi = inf > beta/alpha = " << beta / alpha;
  } else {
    os << "liminf phi = 1 " << (1.0 > beta / alpha ? ">" : "<=") << " beta/alpha = " << beta / alpha;
    if (!(1.0 > beta / alpha)) h.margin = std::min(h.margin, 0.0);
  }
  h.note = os.str();
}

/// R_p: min over the grid of beta - alpha phi(V) - <grad V, b> - chi_p / 2.
inline HypothesisMargin check_R_p(const LyapunovSpec& spec, const DiffusionModel& model, double alpha, double beta,
                                  const std::vector<Vector>& grid,
                                  std::optional<double> lambda_norm_value = std::nullopt) {
  const auto* pol = std::get_if<PolynomialPsi>(&spec.psi);
  if (!pol) throw InputError("check_R_p: needs a polynomial psi");
  const double p = pol->p;
  const double a = spec.phi_exponent;
  HypothesisMargin h;
  h.id = "R_p";
  h.parameters = {{"alpha", alpha}, {"beta", beta}, {"a", a}, {"p", p}};
  const double lam = lambda_norm_value ? *lambda_norm_value : lambda_norm(spec, p, grid).value;
  h.parameters.emplace_back("lambda_norm", lam);
  detail::grid_min(h, grid, [&](const Vector& x) {
    const double v = spec.value(x);
    return beta - alpha * spec.phi(v) - spec.gradient(x).dot(model.drift(x)) -
           0.5 * chi_p_milstein(lam, model, x, p);
  });
  liminf_note(h, a, alpha, beta);
  return h;
}

struct ExpTerms {
  Vector kappa;
  Matrix sigma_matrix;  // Sigma(x)
  std::optional<double> log_det;
  double chi = kInf;
};

/// kappa_p(x), Sigma(x) and chi_p(x) of the exponential recursive control.
inline ExpTerms exponential_terms(const LyapunovSpec& spec, const DiffusionModel& model, double c_sigma,
                                  const Vector& x) {
  const auto* e = std::get_if<ExponentialPsi>(&spec.psi);
  if (!e) throw InputError("exponential_terms: needs an exponential psi");
  const double p = e->p;
  const double lambda = e->lambda;
  const int d = model.dim;
  const double v = spec.value(x);
  const double phi = spec.phi(v);
  const Matrix s = model.diffusion(x);
  const Matrix a = s * s.transpose();
  const CorrectionTensor h = model.correction_at(x);
  ExpTerms t;
  t.kappa = Vector::Zero(d);
  for (int i = 0; i < d; ++i) t.kappa += 0.5 * h.column(i, i);
  t.kappa += lambda * p * std::pow(v, p - 1.0) / phi * (a * spec.gradient(x));
  const double u1 = uncontracted_correction_norm(model, x, 1);
  const double diag = 1.0 - 2.0 * c_sigma * spec.sqrt_v_lip * std::pow(spec.v_star, p - 0.5) * 0.5 * u1;
  const double hess_norm = spec.hess_sup > 0.0 ? spec.hess_sup : linalg::spectral_norm_symmetric(spec.hessian(x));
  t.sigma_matrix = diag * Matrix::Identity(d, d) -
                   hess_norm * c_sigma * std::pow(v, p - 1.0) * (s.transpose() * s);
  t.log_det = linalg::log_det_spd(t.sigma_matrix);
  if (t.log_det) t.chi = -(std::pow(v, 1.0 - p) / phi) / c_sigma * *t.log_det;
  return t;
}

/// R_p for psi(y) = exp(lambda y^p): beta - alpha phi(V) - <grad V, b + kappa_p> - chi_p / 2.
/// A Sigma(x) that is not positive definite makes the margin -inf at x.
inline HypothesisMargin check_R_p_lambda_exp(const LyapunovSpec& spec, const DiffusionModel& model, double alpha,
                                             double beta, const ScalarField& c_sigma,
                                             const std::vector<Vector>& grid) {
  const auto* e = std::get_if<ExponentialPsi>(&spec.psi);
  if (!e) throw InputError("check_R_p_lambda_exp: needs an exponential psi");
  if (model.dim > 1 && !model.commutative_noise) {
    throw ConfigurationError("check_R_p_lambda_exp: non-commutative noise in d > 1 is not supported");
  }
  HypothesisMargin h;
  h.id = "R_p_exp";
  h.parameters = {{"alpha", alpha}, {"beta", beta}, {"a", spec.phi_exponent}, {"p", e->p}, {"lambda", e->lambda}};
  std::optional<Vector> bad;
  detail::grid_min(h, grid, [&](const Vector& x) {
    const double c = c_sigma(x);
    if (!(c > 0.0)) throw InputError("check_R_p_lambda_exp: C_sigma must be positive");
    const ExpTerms t = exponential_terms(spec, model, c, x);
    if (!t.log_det) {
      if (!bad) bad = x;
      return -kInf;
    }
    const double v = spec.value(x);
    return beta - alpha * spec.phi(v) - spec.gradient(x).dot(model.drift(x) + t.kappa) - 0.5 * t.chi;
  });
  liminf_note(h, spec.phi_exponent, alpha, beta);
  if (bad) h.note = "Sigma(x) not positive definite at x = " + detail::format_point(*bad);
  return h;
}

/// Tr[sigma sigma^*] |b| (sqrt V + |b|) <= C V^{1-p} phi(V)
inline HypothesisMargin check_dominance(const LyapunovSpec& spec, const DiffusionModel& model, double c,
                                        const std::vector<Vector>& grid) {
  const double p = spec.psi_p();
  HypothesisMargin h;
  h.id = "dominance";
  h.strict = false;
  h.parameters = {{"C", c}, {"p", p}, {"a", spec.phi_exponent}};
  detail::grid_min(h, grid, [&](const Vector& x) {
    const double v = spec.value(x);
    const double nb = model.drift(x).norm();
    return c * std::pow(v, 1.0 - p) * spec.phi(v) - trace_sigma_sigma(model, x) * nb * (std::sqrt(v) + nb);
  });
  return h;
}

/// |b|^2 + Tr[sigma sigma^*] + sum |d sigma sigma|^2 <= C phi(V)
inline HypothesisMargin check_B_phi(const LyapunovSpec& spec, const DiffusionModel& model, double c,
                                    const std::vector<Vector>& grid) {
  HypothesisMargin h;
  h.id = "B_phi";
  h.strict = false;
  h.parameters = {{"C", c}, {"a", spec.phi_exponent}};
  detail::grid_min(h, grid, [&](const Vector& x) {
    const double lhs = model.drift(x).squaredNorm() + trace_sigma_sigma(model, x) +
                       uncontracted_correction_norm(model, x, 2);
    return c * spec.phi(spec.value(x)) - lhs;
  });
  return h;
}

// ---------------------------------------------------------------------------
// Laplace bound
// ---------------------------------------------------------------------------

/// exp(h |v|^2 / (2 (1 - h))) det(I - 2 L^T L)^{-h/2}
inline double laplace_bound(const Matrix& lam, const Vector& v, double h) {
  if (!(h > 0.0 && h < 1.0)) throw InputError("laplace_bound: h must lie in (0, 1)");
  if (lam.rows() != lam.cols() || lam.rows() != v.size()) throw InputError("laplace_bound: dimension mismatch");
  const Eigen::Index d = lam.rows();
  const Matrix sigma = Matrix::Identity(d, d) - 2.0 * lam.transpose() * lam;
  const auto ld = linalg::log_det_spd(sigma);
  if (!ld) throw InputError("laplace_bound: I - 2 L^T L is not positive definite");
  return std::exp(h * v.squaredNorm() / (2.0 * (1.0 - h)) - 0.5 * h * *ld);
}

// ---------------------------------------------------------------------------
// BDG constants and K_p
// ---------------------------------------------------------------------------

/// C_r of the Burkholder-Davis-Gundy inequality. The default is (32 r)^r for
/// r >= 1 and C_1 below 1.
struct BdgTable {
  std::function<double(double)> constant;

  double operator()(double r) const { return constant(r); }

  static BdgTable standard() {
    return {[](double r) {
      const double rr = std::max(r, 1.0);
      return std::pow(32.0 * rr, rr);
    }};
  }
  static BdgTable unit() {
    return {[](double) { return 1.0; }};
  }
};

/// smallest k with 2^k >= p
inline int k0(double p) {
  if (!(p > 1.0)) throw InputError("k0: p must exceed 1");
  int k = 0;
  double two_k = 1.0;
  while (two_k < p) {
    two_k *= 2.0;
    ++k;
  }
  return k;
}

inline double frak_K_p(double p, bool finite_pi, const BdgTable& table = BdgTable::standard()) {
  if (!(p > 1.0)) throw InputError("frak_K_p: p must exceed 1");
  if (finite_pi) return 1.0;
  const int k = k0(p);
  double prod = 1.0;
  for (int j = 1; j <= k; ++j) prod *= table(p * std::pow(2.0, 1 - j));
  return p * std::pow(2.0, 2.0 * p) * std::pow(2.0, p / (2.0 - std::pow(2.0, 1 - k)) - k) * table(p) * prod;
}

// ---------------------------------------------------------------------------
// Jump moments
// ---------------------------------------------------------------------------

/// Partial sums above this are treated as divergent.
inline constexpr double kDivergenceCap = 1e300;

/// tau_{p,gamma}(x) = int_{F_gamma} |c|^{2p} zeta dpi; gamma = 0 integrates over F.
/// Returns +inf when the integral diverges.
inline double tau_p(const JumpModel& jm, double p, double gamma, const Vector& x, int nodes = 1024) {
  if (!(p > 0.0)) throw InputError("tau_p: p must be positive");
  if (gamma < 0.0) throw InputError("tau_p: gamma must be nonnegative");
  if (jm.tau_closed_form) return jm.tau_closed_form(p, gamma, x);
  const auto& pi = jm.measure;
  if (!pi.deterministic_quadrature()) {
    if (!std::isfinite(pi.mass(gamma)) || !pi.sample) {
      throw ConfigurationError("tau_p: jump model '" + jm.name + "' has no usable quadrature");
    }
    nodes = kMonteCarloMarks;
  }
  std::function<double(const Mark&)> g = [&](const Mark& z) {
    const double zeta = jm.censor(z, x);
    if (zeta == 0.0) return 0.0;
    return std::pow(jm.jump_coeff(z, x).norm(), 2.0 * p) * zeta;
  };
  const double v = integrate_marks<double>(pi, gamma, g, 0.0, nodes).value;
  if (!std::isfinite(v) || v > kDivergenceCap) return kInf;
  return v;
}

/// H^p(phi, V): tau_p <= C phi(V)^p; an infinite tau_p is failure evidence.
inline HypothesisMargin check_H_p(const LyapunovSpec& spec, const JumpModel& jm, double p, double c,
                                  const std::vector<Vector>& grid) {
  HypothesisMargin h;
  h.id = "H_p";
  h.strict = false;
  h.parameters = {{"p", p}, {"C", c}, {"a", spec.phi_exponent}};
  detail::grid_min(h, grid, [&](const Vector& x) {
    const double t = tau_p(jm, p, 0.0, x);
    if (!std::isfinite(t)) return -kInf;
    return c * std::pow(spec.phi(spec.value(x)), p) - t;
  });
  if (h.margin == -kInf) h.note = "tau_p diverges at x = " + detail::format_point(h.argmin);
  return h;
}

/// limsup |c(z, x)| / |x| < 1, sampled on spheres of the given radii.
inline HypothesisMargin check_sublinear_jumps(const JumpModel& jm, const std::vector<Mark>& marks,
                                              const std::vector<double>& radii = {1e2, 1e3, 1e4},
                                              int directions = 64) {
  if (marks.empty()) throw InputError("check_sublinear_jumps: no marks");
  HypothesisMargin h;
  h.id = "sublinear_jumps";
  std::optional<double> violated;
  for (double r : radii) {
    for (const auto& x : log_radial_grid(jm.dim, {r}, directions, false)) {
      for (const auto& z : marks) {
        const double m = 1.0 - jm.jump_coeff(z, x).norm() / x.norm();
        if (h.argmin.size() == 0 || m < h.margin) {
          h.margin = m;
          h.argmin = x;
        }
        if (m <= 0.0 && !violated) violated = r;
      }
    }
  }
  for (double r : radii) h.parameters.emplace_back("radius", r);
  if (violated) {
    std::ostringstream os;
    os << "violated at radius " << *violated;
    h.verdict_text = os.str();
  } else {
    h.verdict_text = "consistent";
  }
  return h;
}

/// Holder constants used by chi_{p,q}: [V^p]_{2q} and [V^{p-1} grad V]_{2q-1}.
struct HolderConstants {
  std::optional<double> vp_2q;
  std::optional<double> vp1_grad;
};

/// max |f(x) - f(y)| / |x - y|^exponent over random pairs in the ball of the
/// given radius (a lower estimate of the Holder constant).
inline double estimate_holder_constant(const VectorField& f, double exponent, int dim, double radius,
                                       int pairs = 20000, std::uint64_t seed = 3) {
  if (!(exponent >= 0.0 && exponent <= 1.0)) throw InputError("estimate_holder_constant: exponent outside [0, 1]");
  Rng rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::uniform_real_distribution<double> logscale(-6.0, std::log10(2.0 * radius));
  std::normal_distribution<double> n01;
  double best = 0.0;
  for (int k = 0; k < pairs; ++k) {
    Vector x(dim);
    for (int i = 0; i < dim; ++i) x(i) = u(rng);
    Vector dir(dim);
    for (int i = 0; i < dim; ++i) dir(i) = n01(rng);
    const double dn = dir.norm();
    if (dn == 0.0) continue;
    const Vector y = x + std::pow(10.0, logscale(rng)) / dn * dir;
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    best = std::max(best, (f(x) - f(y)).norm() / std::pow(dist, exponent));
  }
  return best;
}

/// Norms entering chi_{p,q}: ||lambda_1||, ||lambda_p||, K_p.
struct JumpChiNorms {
  double lambda1 = 0.0;
  double lambdap = 0.0;
  double frak_K = 1.0;
};

inline JumpChiNorms jump_chi_norms(const LyapunovSpec& spec, const JumpModel& jm, double p,
                                   const std::vector<Vector>& grid, const BdgTable& table = BdgTable::standard()) {
  JumpChiNorms n;
  n.lambda1 = lambda_norm(spec, 1.0, grid).value;
  if (p > 1.0) {
    n.lambdap = lambda_norm(spec, p, grid).value;
    n.frak_K = frak_K_p(p, jm.measure.finite_total(), table);
  }
  return n;
}

/// chi_{p,q}(x), branches p < 1, p = 1, p > 1.
inline double chi_pq_jump(const LyapunovSpec& spec, const JumpModel& jm, const Vector& x, double p, double q,
                          const HolderConstants& holder, const JumpChiNorms& norms,
                          const BdgTable& table = BdgTable::standard()) {
  if (!(p > 0.0) || !(q > 0.0)) throw InputError("chi_pq_jump: p and q must be positive");
  if (p == 1.0) return norms.lambda1 * tau_p(jm, 1.0, 0.0, x);
  if (p > 1.0) {
    const double v = spec.value(x);
    const double t1 = tau_p(jm, 1.0, 0.0, x);
    const double tp = tau_p(jm, p, 0.0, x);
    return norms.lambdap * std::pow(2.0, std::max(2.0 * p - 3.0, 0.0)) *
           (t1 + std::pow(spec.sqrt_v_lip, 2.0 * p - 2.0) * std::pow(v, 1.0 - p) * norms.frak_K * tp);
  }
  const double qq = std::min(q, 1.0);
  double factor;
  if (q <= 0.5) {
    if (!holder.vp_2q) throw ConfigurationError("chi_pq_jump: missing Holder constant [V^p]_{2q}");
    factor = *holder.vp_2q;
  } else {
    if (!holder.vp1_grad) throw ConfigurationError("chi_pq_jump: missing Holder constant [V^{p-1} grad V]_{2q-1}");
    factor = table(qq) * *holder.vp1_grad;
  }
  const double tilde = factor * tau_p(jm, qq, 0.0, x);
  return 2.0 / p * std::pow(spec.value(x), 1.0 - p) * tilde;
}

/// R_{p,q}: beta - alpha phi(V) - <grad V, b + int c zeta dpi> - chi_{p,q} / 2.
inline HypothesisMargin check_R_pq_jump(const LyapunovSpec& spec, const JumpModel& jm, const VectorField& drift,
                                        double alpha, double beta, double p, double q,
                                        const std::vector<Vector>& grid, const HolderConstants& holder = {},
                                        const BdgTable& table = BdgTable::standard()) {
  HypothesisMargin h;
  h.id = "R_pq";
  h.parameters = {{"alpha", alpha}, {"beta", beta}, {"a", spec.phi_exponent}, {"p", p}, {"q", q}};
  const JumpChiNorms norms = jump_chi_norms(spec, jm, p, grid, table);
  detail::grid_min(h, grid, [&](const Vector& x) {
    Vector b = drift ? drift(x) : Vector(Vector::Zero(jm.dim));
    b += compensator_full(jm, x);
    return beta - alpha * spec.phi(spec.value(x)) - spec.gradient(x).dot(b) -
           0.5 * chi_pq_jump(spec, jm, x, p, q, holder, norms, table);
  });
  liminf_note(h, spec.phi_exponent, alpha, beta);
  return h;
}

/// e^{-theta} sum_k (k+1)^a theta^k / k!, i.e. 1 + eps(theta).
inline double one_plus_eps(double theta, double a) {
  if (!(theta >= 0.0) || !(a >= 0.0)) throw InputError("one_plus_eps: invalid arguments");
  if (theta == 0.0) return 1.0;
  double sum = 0.0;
  for (std::uint64_t k = 0;; ++k) {
    const double kd = static_cast<double>(k);
    const double log_term = -theta + kd * std::log(theta) - std::lgamma(kd + 1.0) + a * std::log(kd + 1.0);
    const double term = std::exp(log_term);
    sum += term;
    if (kd > theta + 1.0 && term <= 1e-12 * sum) break;
    if (k > 100000000ULL) break;
  }
  return sum;
}

enum class MomentRegime { raw, compensated };

struct JumpMomentBound {
  /// gamma K tau
  double first_order = 0.0;
  /// second-order term when computable (gamma eps tau for finite pi)
  std::optional<double> slack;
  std::string branch;
};

inline JumpMomentBound jump_moment_bound(const JumpModel& jm, double p, double gamma, const Vector& x,
                                         MomentRegime regime, const BdgTable& table = BdgTable::standard()) {
  if (!(p > 0.0) || !(gamma > 0.0)) throw InputError("jump_moment_bound: p and gamma must be positive");
  const bool finite = jm.measure.finite_total();
  JumpMomentBound out;
  if (regime == MomentRegime::raw) {
    if (finite) {
      const double tau = tau_p(jm, p, 0.0, x);
      const double theta = gamma * jm.censor_max * jm.measure.total_mass;
      const double ope = one_plus_eps(theta, std::max(2.0 * p - 1.0, 0.0));
      out.first_order = gamma * tau;
      out.slack = gamma * (ope - 1.0) * tau;
      out.branch = "raw, finite pi";
      return out;
    }
    if (p <= 0.5) {
      out.first_order = gamma * tau_p(jm, p, gamma, x);
      out.slack = 0.0;
      out.branch = "raw, p <= 1/2";
      return out;
    }
    throw ConfigurationError("jump_moment_bound: raw jumps with infinite pi need p <= 1/2");
  }
  if (p < 0.5) throw ConfigurationError("jump_moment_bound: compensated jumps need p >= 1/2");
  const double tau = tau_p(jm, p, gamma, x);
  if (p < 1.0) {
    out.first_order = table(p) * gamma * tau;
    out.slack = 0.0;
    out.branch = "compensated, p in [1/2, 1)";
  } else if (p == 1.0) {
    out.first_order = gamma * tau;
    out.slack = 0.0;
    out.branch = "compensated, p = 1 (equality)";
  } else {
    out.first_order = frak_K_p(p, finite, table) * gamma * tau;
    out.branch = "compensated, p > 1";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generator residuals
// ---------------------------------------------------------------------------

inline std::string generator_label(const std::string& f_label) { return "A[" + f_label + "]"; }

/// The composite functionals x -> Af(x), to be registered with an accumulator
/// before simulation.
inline std::vector<TestFunctional> generator_functionals(const std::function<double(const TestFunctional&, const Vector&)>& gen_apply,
                                                         const std::vector<TestFunctional>& f_suite) {
  std::vector<TestFunctional> out;
  for (const auto& f : f_suite) {
    if (!f.compactly_supported()) {
      throw InputError("generator residual: '" + f.label + "' is not compactly supported");
    }
    TestFunctional af;
    af.label = generator_label(f.label);
    af.growth = f.growth;
    af.eval = [gen_apply, f](const Vector& x) { return gen_apply(f, x); };
    out.push_back(std::move(af));
  }
  return out;
}

/// nu_n(Af) for every f of the suite, read from the accumulator.
inline std::vector<double> generator_residual(const EmpiricalAccumulator& acc, const std::vector<TestFunctional>& f_suite) {
  std::vector<double> out;
  for (const auto& f : f_suite) {
    if (!f.compactly_supported()) {
      throw InputError("generator residual: '" + f.label + "' is not compactly supported");
    }
    out.push_back(acc.value(generator_label(f.label)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

inline void write_hypothesis_csv(std::ostream& os, const std::vector<HypothesisMargin>& hs) {
  const auto old = os.precision(12);
  os << "id,verdict,margin,argmin,parameters\n";
  for (const auto& h : hs) {
    os << h.id << ',' << h.verdict() << ',' << h.margin << ',' << detail::format_point(h.argmin) << ',';
    for (std::size_t i = 0; i < h.parameters.size(); ++i) {
      os << (i ? ";" : "") << h.parameters[i].first << '=' << h.parameters[i].second;
    }
    os << '\n';
  }
  os.precision(old);
}

}  // namespace ergodic::verify
