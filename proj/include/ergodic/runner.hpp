#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ergodic/catalog.hpp"
#include "ergodic/config.hpp"
#include "ergodic/empirical.hpp"
#include "ergodic/errors.hpp"
#include "ergodic/model.hpp"
#include "ergodic/oracles.hpp"
#include "ergodic/schedules.hpp"
#include "ergodic/schemes.hpp"
#include "ergodic/verify.hpp"

namespace ergodic {

struct RunSetup {
  catalog::Entry entry;
  Schedule schedule = Schedule::equal_weights(0.5, 1.0 / 3.0);
  std::vector<TestFunctional> functionals;
  std::vector<TestFunctional> bumps;
  Vector x0;
};

namespace detail {

inline LyapunovSpec configured_lyapunov(const RunConfig& cfg, const catalog::Entry& e) {
  LyapunovSpec spec = e.lyapunov;
  if (cfg.lyap_v0 || cfg.lyap_scale) {
    spec = quadratic_lyapunov(e.dim, cfg.lyap_v0.value_or(1.0), cfg.lyap_scale.value_or(catalog::kDefaultLyapunovScale),
                              spec.psi, spec.phi_exponent);
  }
  if (cfg.lyap_a) spec.phi_exponent = *cfg.lyap_a;
  const double default_p = e.jump ? 1.0 : 2.0;
  if (cfg.lyap_psi == "exp") {
    spec.psi = ExponentialPsi{cfg.lyap_lambda, cfg.lyap_p.value_or(0.5)};
  } else {
    spec.psi = PolynomialPsi{cfg.lyap_p.value_or(default_p)};
  }
  return spec;
}

}  // namespace detail

inline RunSetup build_setup(const RunConfig& cfg) {
  RunSetup s;
  s.entry = catalog::make(cfg.model, cfg.model_params);
  s.entry.lyapunov = detail::configured_lyapunov(cfg, s.entry);
  const int d = s.entry.dim;
  s.schedule = cfg.equal_weights ? Schedule::equal_weights(cfg.gamma1, cfg.theta)
                                 : Schedule::polynomial(cfg.gamma1, cfg.theta, cfg.eta1, cfg.kappa);
  if (cfg.scheme == SchemeKind::jump && !s.entry.jump) {
    throw ConfigurationError("model '" + cfg.model + "' has no jump component");
  }
  if (cfg.scheme != SchemeKind::jump && !s.entry.diffusion) {
    throw ConfigurationError("model '" + cfg.model + "' needs scheme = jump");
  }
  if (cfg.scheme == SchemeKind::milstein) check_milstein_mode(*s.entry.diffusion, cfg.levy_area);

  for (int c = 0; c < d; ++c) {
    for (int k = 1; k <= cfg.monomials; ++k) s.functionals.push_back(functionals::monomial(d, c, k));
  }
  for (const auto& b : cfg.bumps) {
    if (static_cast<int>(b.center.size()) != d) throw InputError("bump center dimension does not match the model");
    s.bumps.push_back(functionals::bump(Eigen::Map<const Vector>(b.center.data(), d), b.radius));
  }
  for (const auto& b : s.bumps) s.functionals.push_back(b);
  if (cfg.generator) {
    std::function<double(const TestFunctional&, const Vector&)> gen;
    if (cfg.scheme == SchemeKind::jump) {
      const JumpModel jm = *s.entry.jump;
      const VectorField drift = s.entry.drift;
      gen = [jm, drift](const TestFunctional& f, const Vector& x) { return jump_generator_apply(jm, drift, f, x).value; };
    } else {
      const DiffusionModel m = *s.entry.diffusion;
      gen = [m](const TestFunctional& f, const Vector& x) { return diffusion_generator_apply(m, f, x); };
    }
    for (auto& af : verify::generator_functionals(gen, s.bumps)) s.functionals.push_back(std::move(af));
  }
  if (cfg.x0.empty()) {
    s.x0 = Vector::Zero(d);
  } else {
    if (static_cast<int>(cfg.x0.size()) != d) throw InputError("run.x0 dimension does not match the model");
    s.x0 = Eigen::Map<const Vector>(cfg.x0.data(), d);
  }
  return s;
}

inline Stepper make_stepper(const RunSetup& s, const RunConfig& cfg, IncrementGenerator& inc) {
  switch (cfg.scheme) {
    case SchemeKind::euler: {
      const DiffusionModel* m = &*s.entry.diffusion;
      return [m, &inc](const Vector& x, double g) { return euler_step(*m, x, g, inc); };
    }
    case SchemeKind::milstein: {
      const DiffusionModel* m = &*s.entry.diffusion;
      return [m, &inc](const Vector& x, double g) { return milstein_step(*m, x, g, inc); };
    }
    case SchemeKind::jump: {
      const JumpModel* jm = &*s.entry.jump;
      const VectorField* drift = &s.entry.drift;
      return [jm, drift, &inc](const Vector& x, double g) { return jump_euler_step(*jm, *drift, x, g, inc); };
    }
  }
  throw InputError("unknown scheme");
}

struct ReplicaResult {
  std::unique_ptr<EmpiricalAccumulator> acc;
  ChainState final_state;
  std::optional<std::string> fault;
};

/// Replica r uses RNG stream r of the configured seed.
inline ReplicaResult run_replica(const RunSetup& s, const RunConfig& cfg, std::uint64_t replica) {
  ReplicaResult out;
  out.acc = std::make_unique<EmpiricalAccumulator>(s.entry.dim, s.functionals, true);
  IncrementGenerator inc(cfg.seed, replica, cfg.increments, cfg.levy_area);
  const Stepper step = make_stepper(s, cfg, inc);
  try {
    out.final_state = simulate_chain(step, s.schedule, s.x0, cfg.steps, {out.acc.get()});
  } catch (const NumericFault& f) {
    std::ostringstream os;
    os.precision(17);
    os << f.what() << " at step " << f.index() << " (gamma = " << f.step() << ", state = "
       << verify::detail::format_point(f.state()) << ")";
    out.fault = os.str();
  }
  return out;
}

/// Replicas run on their own threads; results are ordered by replica index.
inline std::vector<ReplicaResult> run_replicas(const RunSetup& s, const RunConfig& cfg) {
  std::vector<ReplicaResult> results(cfg.replicas);
  std::vector<std::exception_ptr> errors(cfg.replicas);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  for (std::uint64_t base = 0; base < cfg.replicas; base += hw) {
    std::vector<std::thread> pool;
    for (std::uint64_t r = base; r < std::min<std::uint64_t>(cfg.replicas, base + hw); ++r) {
      pool.emplace_back([&, r] {
        try {
          results[r] = run_replica(s, cfg, r);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

// ---------------------------------------------------------------------------
// Hypothesis checks
// ---------------------------------------------------------------------------

inline verify::HypothesisMargin condition_margin(const ConditionReport& r, const std::string& id,
                                                 std::vector<std::pair<std::string, double>> params = {}) {
  verify::HypothesisMargin h;
  h.id = id;
  h.margin = r.verdict == Verdict::holds ? 1.0 : -1.0;
  h.verdict_text = to_string(r.verdict);
  h.parameters = std::move(params);
  if (r.exponent) h.parameters.emplace_back("exponent", *r.exponent);
  if (r.tail_slope) h.parameters.emplace_back("tail_slope", *r.tail_slope);
  h.note = to_string(r.method) + (r.note.empty() ? "" : ": " + r.note);
  return h;
}

inline verify::HypothesisMargin inequality_margin(const std::string& id, double lhs, double rhs, bool strict,
                                                  std::vector<std::pair<std::string, double>> params) {
  verify::HypothesisMargin h;
  h.id = id;
  h.margin = rhs - lhs;
  h.strict = strict;
  h.parameters = std::move(params);
  return h;
}

namespace detail {

/// Smallest C with lhs(x) <= C phi(V(x)) on the grid, padded by 1%.
template <typename F>
double estimated_constant(const LyapunovSpec& spec, const std::vector<Vector>& grid, F&& lhs) {
  double c = 0.0;
  for (const auto& x : grid) c = std::max(c, lhs(x) / spec.phi(spec.value(x)));
  return 1.01 * c;
}

}  // namespace detail

inline std::vector<verify::HypothesisMargin> check_hypotheses(const RunSetup& s, const RunConfig& cfg) {
  std::vector<verify::HypothesisMargin> out;
  const auto& e = s.entry;
  const auto& spec = e.lyapunov;
  const int d = e.dim;
  const auto grid = verification_grid(d);
  const double a = spec.phi_exponent;
  const double p = spec.psi_p();
  const double rho = cfg.check_rho;
  const double sx = cfg.check_s;

  {
    const auto lr = validate_lyapunov(spec, grid, d);
    verify::HypothesisMargin h;
    h.id = "L_V";
    h.margin = lr.passes() ? 1.0 : -1.0;
    h.verdict_text = lr.passes() ? "holds" : "fails";
    h.parameters = {{"v_star", spec.v_star}, {"max_grad_ratio", lr.max_grad_ratio}};
    out.push_back(h);
  }

  if (e.diffusion && cfg.scheme != SchemeKind::jump) {
    const auto& m = *e.diffusion;
    const auto mr = validate_model(m, grid);
    verify::HypothesisMargin h;
    h.id = "model";
    h.margin = mr.passes() ? 1.0 : -1.0;
    h.verdict_text = mr.passes() ? "holds" : "fails";
    h.parameters = {{"commutativity_residual", mr.commutativity_residual}};
    out.push_back(h);

    auto b_lhs = [&](const Vector& x) {
      return m.drift(x).squaredNorm() + verify::trace_sigma_sigma(m, x) + uncontracted_correction_norm(m, x, 2);
    };
    const double cb = cfg.check_b_phi_c ? *cfg.check_b_phi_c : detail::estimated_constant(spec, grid, b_lhs);
    auto bphi = verify::check_B_phi(spec, m, cb, grid);
    if (!cfg.check_b_phi_c) bphi.note = "C estimated on the grid";
    out.push_back(bphi);

    if (std::holds_alternative<ExponentialPsi>(spec.psi)) {
      const double cs = cfg.check_c_sigma;
      out.push_back(verify::check_R_p_lambda_exp(spec, m, cfg.check_alpha, cfg.check_beta,
                                                 [cs](const Vector&) { return cs; }, grid));
      auto dom_lhs = [&](const Vector& x) {
        const double nb = m.drift(x).norm();
        const double v = spec.value(x);
        return verify::trace_sigma_sigma(m, x) * nb * (std::sqrt(v) + nb) / std::pow(v, 1.0 - p);
      };
      const double cd = cfg.check_dominance_c ? *cfg.check_dominance_c : detail::estimated_constant(spec, grid, dom_lhs);
      auto dom = verify::check_dominance(spec, m, cd, grid);
      if (!cfg.check_dominance_c) dom.note = "C estimated on the grid";
      out.push_back(dom);
    } else {
      out.push_back(verify::check_R_p(spec, m, cfg.check_alpha, cfg.check_beta, grid));
    }
    out.push_back(condition_margin(check_sw1(s.schedule, rho, EpsilonShape(rho / 2.0), cfg.check_horizon), "SW_I",
                                   {{"rho", rho}, {"eps_exponent", rho / 2.0}}));
  } else {
    const auto& jm = *e.jump;
    const auto mr = validate_model(jm, grid);
    verify::HypothesisMargin h;
    h.id = "model";
    h.margin = mr.passes() ? 1.0 : -1.0;
    h.verdict_text = mr.passes() ? "holds" : "fails";
    h.parameters = {{"censor_ratio_max", mr.censor_ratio_max}};
    out.push_back(h);

    const double q = p <= 1.0 ? std::max(cfg.check_q, p) : p;
    auto bq_lhs = [&](const Vector& x) {
      return (e.drift(x) + (jump_regime(jm) == JumpRegime::compensated ? compensator_full(jm, x) : Vector(Vector::Zero(d))))
          .squaredNorm();
    };
    const double cb = cfg.check_b_phi_c ? *cfg.check_b_phi_c : detail::estimated_constant(spec, grid, bq_lhs);
    auto bq = inequality_margin("B_q", 0.0, 0.0, false, {{"C", cb}, {"q", q}});
    verify::detail::grid_min(bq, grid, [&](const Vector& x) { return cb * spec.phi(spec.value(x)) - bq_lhs(x); });
    if (!cfg.check_b_phi_c) bq.note = "C estimated on the grid";
    out.push_back(bq);

    out.push_back(verify::check_R_pq_jump(spec, jm, e.drift, cfg.check_alpha, cfg.check_beta, p, q, grid));
    std::vector<double> hs = {q};
    if (p > 1.0) hs = {p, 1.0};
    for (double hp : hs) {
      auto tau_lhs = [&](const Vector& x) { return verify::tau_p(jm, hp, 0.0, x) / std::pow(spec.phi(spec.value(x)), hp - 1.0); };
      const double ch = detail::estimated_constant(spec, grid, tau_lhs);
      auto hh = verify::check_H_p(spec, jm, hp, ch, grid);
      hh.id = "H^" + std::to_string(hp).substr(0, 4);
      hh.note = "C estimated on the grid";
      out.push_back(hh);
    }
    std::vector<Mark> marks;
    for (const auto& atom : jm.measure.atoms) marks.push_back(atom.z);
    if (marks.empty() && jm.measure.sample) {
      Rng rng = make_rng(17, 0);
      for (int i = 0; i < 32; ++i) marks.push_back(jm.measure.sample(1e-3, rng));
    }
    if (!marks.empty()) out.push_back(verify::check_sublinear_jumps(jm, marks));

    out.push_back(inequality_margin("q_range", std::max(rho / 2.0, p), q, false, {{"q", q}, {"rho", rho}, {"p", p}}));
    std::vector<double> eps{std::min(2.0, 1.0 / q) * p * rho / sx};
    if (2.0 * p > sx) eps.push_back(rho / (2.0 * std::max(q, 0.5)));
    out.push_back(condition_margin(check_sw1(s.schedule, rho, EpsilonShape(eps), cfg.check_horizon), "SW_I",
                                   {{"rho", rho}}));
    const double tilde = std::min(1.0, rho / (2.0 * q));
    out.push_back(condition_margin(check_sw1(s.schedule, rho, EpsilonShape(tilde), cfg.check_horizon), "SW_I_tau",
                                   {{"rho", rho}, {"eps_exponent", tilde}}));
    out.push_back(inequality_margin("SW_pol_rho", rho, sx, false, {{"rho", rho}, {"s", sx}}));
  }

  out.push_back(condition_margin(check_sw2(s.schedule, cfg.check_horizon), "SW_II"));
  out.push_back(condition_margin(check_avg_variation(s.schedule, cfg.check_horizon), "AVG_VAR"));
  out.push_back(inequality_margin("exponents", a * p * rho / sx, p + a - 1.0, false,
                                  {{"a", a}, {"p", p}, {"rho", rho}, {"s", sx}}));
  out.push_back(inequality_margin("tightness", 0.0, p / sx + a - 1.0, true, {{"p", p}, {"s", sx}, {"a", a}}));
  return out;
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

struct FunctionalSummary {
  std::string label;
  double mean = 0.0;
  double std_error = 0.0;
};

inline std::vector<FunctionalSummary> summarize(const std::vector<ReplicaResult>& rs) {
  std::vector<FunctionalSummary> out;
  if (rs.empty()) return out;
  const auto& fs = rs.front().acc->functionals();
  const double R = static_cast<double>(rs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    double m = 0.0;
    for (const auto& r : rs) m += r.acc->value(i);
    m /= R;
    double v = 0.0;
    for (const auto& r : rs) v += (r.acc->value(i) - m) * (r.acc->value(i) - m);
    const double se = rs.size() > 1 ? std::sqrt(v / (R - 1.0) / R) : 0.0;
    out.push_back({fs[i].label, m, se});
  }
  return out;
}

/// Reference law of the first coordinate for the configured reference.
inline std::optional<oracles::ReferenceLaw> reference_law(const RunSetup& s, const RunConfig& cfg) {
  const auto& e = s.entry;
  if (cfg.reference == "speed_measure") {
    if (e.dim != 1 || !e.drift_1d || !e.sigma_1d) {
      throw ConfigurationError("reference speed_measure needs a one-dimensional diffusion entry");
    }
    double lo = e.support_1d.first;
    const double hi = e.support_1d.second;
    if (e.sigma_1d(lo) <= 0.0) lo += 1e-9 * (hi - lo);
    return oracles::stationary_density_1d(e.drift_1d, e.sigma_1d, oracles::uniform_grid(lo, hi, 4001));
  }
  if (cfg.reference == "levy_ou_moments") {
    if (!e.shot_noise) throw ConfigurationError("reference levy_ou_moments needs the shot-noise entry");
    const auto& sn = *e.shot_noise;
    return oracles::levy_ou_moments(sn.theta, sn.rate, sn.jump_m1, sn.jump_m2);
  }
  return std::nullopt;
}

struct RunOutcome {
  int exit_code = 0;
  std::filesystem::path dir;
  std::vector<ReplicaResult> replicas;
  std::vector<verify::HypothesisMargin> hypotheses;
};

inline std::filesystem::path resolve_output_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("ERGODIC_OUTPUT_ROOT"); root && *root) p = std::filesystem::path(root) / p;
  }
  return p;
}

inline void write_meta(std::ostream& os, const Config& raw, const RunConfig& cfg) {
  Config echo = raw;
  echo.set("rng.seed", std::to_string(cfg.seed));
  echo.set("run.replicas", std::to_string(cfg.replicas));
  echo.write(os);
  for (std::uint64_t r = 0; r < cfg.replicas; ++r) {
    os << "meta.stream." << r << " = " << r << '\n';
  }
}

/// Drops the meta.* lines so a meta file reads back as a config.
inline Config config_from_meta(const Config& meta) {
  Config c;
  for (const auto& [k, v] : meta.values()) {
    if (k.rfind("meta.", 0) != 0) c.set(k, v);
  }
  return c;
}

inline void write_hypothesis_report(std::ostream& os, const std::vector<verify::HypothesisMargin>& hs) {
  os << "hypotheses\n";
  os.precision(8);
  for (const auto& h : hs) {
    os << "  " << h.id << ": " << h.verdict() << "  margin = " << h.margin;
    if (h.argmin.size() > 0) os << "  argmin = (" << verify::detail::format_point(h.argmin) << ")";
    if (!h.parameters.empty()) {
      os << "  [";
      for (std::size_t i = 0; i < h.parameters.size(); ++i) {
        os << (i ? ", " : "") << h.parameters[i].first << "=" << h.parameters[i].second;
      }
      os << "]";
    }
    if (!h.note.empty()) os << "  " << h.note;
    os << '\n';
  }
}

inline RunOutcome check_only(const Config& raw, std::ostream& report) {
  const RunConfig cfg = parse_run_config(raw);
  const RunSetup s = build_setup(cfg);
  RunOutcome out;
  out.hypotheses = check_hypotheses(s, cfg);
  write_hypothesis_report(report, out.hypotheses);
  return out;
}

inline RunOutcome run_experiment(const Config& raw) {
  const RunConfig cfg = parse_run_config(raw);
  const RunSetup s = build_setup(cfg);
  RunOutcome out;
  out.dir = resolve_output_dir(cfg.output_dir);
  std::filesystem::create_directories(out.dir);
  {
    std::ofstream meta(out.dir / "meta");
    write_meta(meta, raw, cfg);
  }
  if (cfg.check) out.hypotheses = check_hypotheses(s, cfg);
  out.replicas = run_replicas(s, cfg);

  {
    std::ofstream trace(out.dir / "trace.csv");
    write_trace_header(trace, true);
    for (std::size_t r = 0; r < out.replicas.size(); ++r) {
      write_trace_csv(trace, *out.replicas[r].acc, false, static_cast<int>(r));
    }
  }
  if (cfg.check) {
    std::ofstream hcsv(out.dir / "hypotheses.csv");
    verify::write_hypothesis_csv(hcsv, out.hypotheses);
  }

  std::ofstream rep(out.dir / "report.txt");
  rep << "model " << cfg.model << ", scheme " << to_string(cfg.scheme) << ", steps " << cfg.steps << ", replicas "
      << cfg.replicas << ", seed " << cfg.seed << "\n\n";
  rep.precision(10);
  rep << "functionals (mean over replicas, standard error)\n";
  for (const auto& f : summarize(out.replicas)) {
    rep << "  " << f.label << " = " << f.mean << " +/- " << f.std_error << '\n';
  }

  bool faulted = false;
  for (std::size_t r = 0; r < out.replicas.size(); ++r) {
    if (out.replicas[r].fault) {
      faulted = true;
      rep << "\nfault in replica " << r << ": " << *out.replicas[r].fault << '\n';
    }
  }

  if (!faulted) {
    if (auto law = reference_law(s, cfg)) {
      rep << "\nreference " << cfg.reference << '\n';
      if (law->has_cdf()) {
        double worst = 0.0;
        double mean = 0.0;
        for (const auto& r : out.replicas) {
          const auto w = wasserstein1_1d(*r.acc, 0, [&](double x) { return law->cdf(x); });
          worst = std::max(worst, w.value);
          mean += w.value / static_cast<double>(out.replicas.size());
        }
        rep << "  W1 (coordinate 0): mean " << mean << ", max " << worst << '\n';
      }
      for (int k = 1; k <= std::min(cfg.monomials, 2); ++k) {
        rep << "  E[x^" << k << "] = " << law->moment(k) << '\n';
      }
    }
  }

  if (cfg.generator) {
    rep << "\ngenerator residuals nu_N(Af)\n";
    std::vector<double> mean(s.bumps.size(), 0.0);
    for (const auto& r : out.replicas) {
      const auto v = verify::generator_residual(*r.acc, s.bumps);
      for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i] / static_cast<double>(out.replicas.size());
    }
    for (std::size_t i = 0; i < s.bumps.size(); ++i) rep << "  " << s.bumps[i].label << ": " << mean[i] << '\n';
  }

  if (cfg.check) {
    rep << '\n';
    write_hypothesis_report(rep, out.hypotheses);
  }
  out.exit_code = faulted ? 3 : 0;
  return out;
}

}  // namespace ergodic
