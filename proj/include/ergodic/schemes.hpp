#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ergodic/empirical.hpp"
#include "ergodic/errors.hpp"
#include "ergodic/model.hpp"
#include "ergodic/rng.hpp"
#include "ergodic/schedules.hpp"

namespace ergodic {

namespace detail {

inline void require_finite(const Vector& v, const char* what, const Vector& x, double gamma) {
  if (!v.allFinite()) throw NumericFault(std::string(what) + " is not finite", x, gamma, 0);
}

inline void require_finite(const Matrix& m, const char* what, const Vector& x, double gamma) {
  if (!m.allFinite()) throw NumericFault(std::string(what) + " is not finite", x, gamma, 0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Euler and Milstein
// ---------------------------------------------------------------------------

/// x + gamma b(x) + sqrt(gamma) sigma(x) u
inline Vector euler_step(const DiffusionModel& model, const Vector& x, double gamma, const Vector& u) {
  const Vector b = model.drift(x);
  const Matrix s = model.diffusion(x);
  detail::require_finite(b, "drift", x, gamma);
  detail::require_finite(s, "diffusion", x, gamma);
  return x + gamma * b + std::sqrt(gamma) * (s * u);
}

inline Vector euler_step(const DiffusionModel& model, const Vector& x, double gamma,
                         IncrementGenerator& inc) {
  return euler_step(model, x, gamma, inc.brownian(model.dim));
}

/// x + gamma b(x) + sqrt(gamma) sigma(x) u + gamma sum_{i,j} H_{i,j}(x) w_{i,j}
inline Vector milstein_step(const DiffusionModel& model, const Vector& x, double gamma,
                            const Vector& u, const Matrix& w) {
  Vector out = euler_step(model, x, gamma, u);
  const CorrectionTensor h = model.correction_at(x);
  if (!h.all_finite()) throw NumericFault("correction tensor is not finite", x, gamma, 0);
  const int d = model.dim;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double wij = w(i, j);
      if (wij == 0.0) continue;
      for (int k = 0; k < d; ++k) out(k) += gamma * h(k, i, j) * wij;
    }
  }
  return out;
}

/// Rejects Levy-area modes the model cannot use.
inline void check_milstein_mode(const DiffusionModel& model, LevyAreaMode mode) {
  if (mode == LevyAreaMode::exact_1d && model.dim != 1) {
    throw ConfigurationError("exact1d iterated integrals need a one-dimensional model");
  }
  if (mode == LevyAreaMode::commutative && model.dim > 1 && !model.commutative_noise) {
    throw ConfigurationError("commutative iterated integrals need a model flagged commutative_noise");
  }
}

inline Vector milstein_step(const DiffusionModel& model, const Vector& x, double gamma,
                            IncrementGenerator& inc) {
  check_milstein_mode(model, inc.levy_area_mode());
  const Vector u = inc.brownian(model.dim);
  const Matrix w = inc.iterated(u);
  return milstein_step(model, x, gamma, u, w);
}

// ---------------------------------------------------------------------------
// Censored-jump Euler
// ---------------------------------------------------------------------------

enum class JumpRegime { raw, compensated };

/// q <= 1/2 raw; q in (1/2, 1] compensated; q > 1 compensated iff pi(F) = inf.
inline JumpRegime jump_regime(const JumpModel& jm) {
  if (!(jm.regime_q > 0.0)) throw InputError("jump model: q must be positive");
  if (jm.regime_q <= 0.5) return JumpRegime::raw;
  if (jm.regime_q <= 1.0) return JumpRegime::compensated;
  return jm.measure.finite_total() ? JumpRegime::raw : JumpRegime::compensated;
}

/// Largest admissible Poisson intensity gamma zeta_max pi(F_gamma).
inline constexpr double kMaxPoissonMean = 1e9;

inline double poisson_mean(const JumpModel& jm, double gamma) {
  const double mean = gamma * jm.censor_max * jm.measure.mass(gamma);
  if (!(mean <= kMaxPoissonMean)) {
    throw ResourceError("Poisson intensity gamma zeta_max pi(F_gamma) = " + std::to_string(mean) +
                        " exceeds 1e9");
  }
  return mean;
}

struct JumpDraw {
  Mark z;
  double v = 0.0;  // uniform on [0, zeta_max]
};

/// Sum of accepted jumps: sum_k c(z_k, x) 1{v_k <= zeta(z_k, x)}.
inline Vector raw_jump_sum(const JumpModel& jm, const Vector& x, const std::vector<JumpDraw>& draws) {
  Vector j = Vector::Zero(jm.dim);
  for (const auto& d : draws) {
    if (d.v <= jm.censor(d.z, x)) j += jm.jump_coeff(d.z, x);
  }
  return j;
}

/// Drift used by the scheme: b, or b + int_F c zeta dpi when compensated.
inline Vector jump_scheme_drift(const JumpModel& jm, const VectorField& drift, const Vector& x) {
  Vector b = drift ? drift(x) : Vector(Vector::Zero(jm.dim));
  if (jump_regime(jm) == JumpRegime::compensated) b += compensator_full(jm, x);
  return b;
}

/// One step given the K thinning draws of this step.
inline Vector jump_euler_step(const JumpModel& jm, const VectorField& drift, const Vector& x, double gamma,
                              const std::vector<JumpDraw>& draws) {
  Vector out = x + gamma * jump_scheme_drift(jm, drift, x);
  out += raw_jump_sum(jm, x, draws);
  if (jump_regime(jm) == JumpRegime::compensated) out -= gamma * compensator_truncated(jm, gamma, x);
  detail::require_finite(out, "jump step", x, gamma);
  return out;
}

inline std::vector<JumpDraw> draw_jumps(const JumpModel& jm, double gamma, IncrementGenerator& inc) {
  const double mean = poisson_mean(jm, gamma);
  const auto k = inc.poisson(mean);
  std::vector<JumpDraw> draws;
  draws.reserve(static_cast<std::size_t>(k));
  for (std::uint64_t i = 0; i < k; ++i) {
    Mark z = jm.measure.sample(gamma, inc.engine());
    const double v = inc.uniform(0.0, jm.censor_max);
    draws.push_back({std::move(z), v});
  }
  return draws;
}

inline Vector jump_euler_step(const JumpModel& jm, const VectorField& drift, const Vector& x, double gamma,
                              IncrementGenerator& inc) {
  return jump_euler_step(jm, drift, x, gamma, draw_jumps(jm, gamma, inc));
}

// ---------------------------------------------------------------------------
// Chain driver
// ---------------------------------------------------------------------------

struct ChainState {
  Vector x;
  std::uint64_t n = 0;
  double Gamma = 0.0;
};

using Stepper = std::function<Vector(const Vector&, double)>;

inline bool is_checkpoint(std::uint64_t k, std::uint64_t N) {
  return k == N || (k & (k - 1)) == 0;
}

/// For k = 1..N: every sink receives (x_{k-1}, eta_k), then the state moves
/// with step gamma_k. Sinks record a trace point at k in {2^j} and at N.
inline ChainState simulate_chain(const Stepper& step, const Schedule& sched, const Vector& x0,
                                 std::uint64_t N, const std::vector<EmpiricalAccumulator*>& sinks) {
  if (N < 1) throw InputError("simulate_chain: need at least one step");
  if (!x0.allFinite()) throw InputError("simulate_chain: initial point is not finite");
  ChainState st{x0, 0, 0.0};
  ScheduleCursor cur(sched);
  for (std::uint64_t k = 1; k <= N; ++k) {
    cur.advance();
    try {
      for (auto* s : sinks) s->update(st.x, cur.eta());
    } catch (const NumericFault& f) {
      throw NumericFault(f.what(), st.x, cur.gamma(), k);
    }
    Vector next;
    try {
      next = step(st.x, cur.gamma());
    } catch (const NumericFault& f) {
      throw NumericFault(f.what(), st.x, cur.gamma(), k);
    }
    if (!next.allFinite()) throw NumericFault("state is not finite", st.x, cur.gamma(), k);
    st.x = std::move(next);
    st.n = k;
    st.Gamma = cur.Gamma();
    if (is_checkpoint(k, N)) {
      for (auto* s : sinks) s->record_checkpoint(k, st.Gamma);
    }
  }
  return st;
}

}  // namespace ergodic
