#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "ergodic/errors.hpp"
#include "ergodic/summation.hpp"

namespace ergodic {

/// first * n^{-exponent}
struct PolynomialSequence {
  double first = 1.0;
  double exponent = 0.0;
};

struct ExplicitSequence {
  std::function<double(std::uint64_t)> term;
  std::string label = "explicit";
};

struct EqualToStep {};

using StepRule = std::variant<PolynomialSequence, ExplicitSequence>;
using WeightRule = std::variant<PolynomialSequence, ExplicitSequence, EqualToStep>;

class Schedule {
 public:
  Schedule(StepRule step, WeightRule weight) : step_(std::move(step)), weight_(std::move(weight)) {
    if (const auto* p = std::get_if<PolynomialSequence>(&step_)) {
      if (!(p->first > 0.0)) throw InputError("Schedule: gamma_1 must be positive");
      if (!(p->exponent >= 0.0)) throw InputError("Schedule: step exponent must be nonnegative");
    } else if (!std::get<ExplicitSequence>(step_).term) {
      throw InputError("Schedule: explicit step sequence has no generator");
    }
    if (const auto* p = std::get_if<PolynomialSequence>(&weight_)) {
      if (!(p->first > 0.0)) throw InputError("Schedule: eta_1 must be positive");
      if (!(p->exponent >= 0.0)) throw InputError("Schedule: weight exponent must be nonnegative");
    } else if (const auto* e = std::get_if<ExplicitSequence>(&weight_); e && !e->term) {
      throw InputError("Schedule: explicit weight sequence has no generator");
    }
    if (const auto* p = std::get_if<PolynomialSequence>(&step_)) {
      gamma_bar_ = p->first;
    } else {
      // sup estimated over the first 10^4 terms
      const auto& f = std::get<ExplicitSequence>(step_).term;
      double m = 0.0;
      for (std::uint64_t n = 1; n <= 10000; ++n) m = std::max(m, f(n));
      gamma_bar_ = m;
    }
  }

  static Schedule polynomial(double gamma1, double theta, double eta1, double kappa) {
    return Schedule(PolynomialSequence{gamma1, theta}, PolynomialSequence{eta1, kappa});
  }

  static Schedule equal_weights(double gamma1, double theta) {
    return Schedule(PolynomialSequence{gamma1, theta}, EqualToStep{});
  }

  const StepRule& step_rule() const { return step_; }
  const WeightRule& weight_rule() const { return weight_; }

  double gamma(std::uint64_t n) const {
    if (n == 0) throw InputError("Schedule: index must be >= 1");
    if (const auto* p = std::get_if<PolynomialSequence>(&step_)) {
      return p->first * std::pow(static_cast<double>(n), -p->exponent);
    }
    return std::get<ExplicitSequence>(step_).term(n);
  }

  double eta(std::uint64_t n) const {
    if (n == 0) throw InputError("Schedule: index must be >= 1");
    if (const auto* p = std::get_if<PolynomialSequence>(&weight_)) {
      return p->first * std::pow(static_cast<double>(n), -p->exponent);
    }
    if (std::holds_alternative<EqualToStep>(weight_)) return gamma(n);
    return std::get<ExplicitSequence>(weight_).term(n);
  }

  double Gamma_sum(std::uint64_t n) const {
    if (n == 0) throw InputError("Schedule: index must be >= 1");
    CompensatedSum s;
    for (std::uint64_t k = 1; k <= n; ++k) s.add(gamma(k));
    return s.value();
  }

  double H_sum(std::uint64_t n) const {
    if (n == 0) throw InputError("Schedule: index must be >= 1");
    CompensatedSum s;
    for (std::uint64_t k = 1; k <= n; ++k) s.add(eta(k));
    return s.value();
  }

  double gamma_bar() const { return gamma_bar_; }

  /// (theta, kappa) when both sequences are in the polynomial family; kappa =
  /// theta for equal weights.
  std::optional<std::pair<double, double>> exponents() const {
    const auto* s = std::get_if<PolynomialSequence>(&step_);
    if (!s) return std::nullopt;
    if (const auto* w = std::get_if<PolynomialSequence>(&weight_)) return std::pair{s->exponent, w->exponent};
    if (std::holds_alternative<EqualToStep>(weight_)) return std::pair{s->exponent, s->exponent};
    return std::nullopt;
  }

  bool polynomial() const { return exponents().has_value(); }

  /// ln(gamma_1), ln(eta_1) for polynomial schedules.
  std::pair<double, double> log_first_terms() const {
    const auto& s = std::get<PolynomialSequence>(step_);
    if (const auto* w = std::get_if<PolynomialSequence>(&weight_)) {
      return {std::log(s.first), std::log(w->first)};
    }
    return {std::log(s.first), std::log(s.first)};
  }

 private:
  StepRule step_;
  WeightRule weight_;
  double gamma_bar_ = 0.0;
};

/// Walks n = 1, 2, ... keeping Gamma_n and H_n with compensated sums.
class ScheduleCursor {
 public:
  explicit ScheduleCursor(const Schedule& s) : sched_(&s) {}

  void advance() {
    ++n_;
    gamma_ = sched_->gamma(n_);
    eta_ = sched_->eta(n_);
    Gamma_.add(gamma_);
    H_.add(eta_);
  }

  std::uint64_t n() const { return n_; }
  double gamma() const { return gamma_; }
  double eta() const { return eta_; }
  double Gamma() const { return Gamma_.value(); }
  double H() const { return H_.value(); }

 private:
  const Schedule* sched_;
  std::uint64_t n_ = 0;
  double gamma_ = 0.0;
  double eta_ = 0.0;
  CompensatedSum Gamma_;
  CompensatedSum H_;
};

// ---------------------------------------------------------------------------
// Summability conditions
// ---------------------------------------------------------------------------

enum class Condition { sw_i, sw_ii, avg_variation, basic };
enum class Verdict { holds, fails, inconclusive };
enum class CheckMethod { analytic, partial_sum };
enum class MethodRequest { automatic, analytic, partial_sum };

inline std::string to_string(Condition c) {
  switch (c) {
    case Condition::sw_i: return "SW_I";
    case Condition::sw_ii: return "SW_II";
    case Condition::avg_variation: return "AVG_VAR";
    case Condition::basic: return "BASIC";
  }
  return "?";
}

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

inline std::string to_string(CheckMethod m) {
  return m == CheckMethod::analytic ? "analytic" : "partial_sum";
}

struct ConditionReport {
  Condition condition = Condition::basic;
  Verdict verdict = Verdict::inconclusive;
  CheckMethod method = CheckMethod::analytic;
  std::uint64_t horizon = 0;
  std::optional<double> partial_sum;
  std::optional<std::uint64_t> monotonicity_violation;  // last index where the sequence went up
  std::optional<double> exponent;                       // analytic decay exponent
  std::optional<double> tail_slope;                     // log-log slope over [N/10, N]
  std::string note;
};

/// epsilon_I(gamma) = sum_i gamma^{r_i}
struct EpsilonShape {
  std::vector<double> exponents{1.0};

  EpsilonShape() = default;
  EpsilonShape(double r) : exponents{r} {}  // NOLINT(google-explicit-constructor)
  EpsilonShape(std::vector<double> rs) : exponents(std::move(rs)) {}  // NOLINT

  double dominant() const { return *std::min_element(exponents.begin(), exponents.end()); }
};

struct Sw1Request {
  double rho = 2.0;
  EpsilonShape eps;
};

/// Tolerance on log-log slopes in the partial-sum method.
inline constexpr double kSlopeBand = 0.02;

namespace detail {

inline bool near(double a, double b) { return std::abs(a - b) < 1e-12; }

inline double ls_slope(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxy / sxx;
}

/// ~256 log-spaced indices in [N/10, N], deduplicated.
inline std::vector<std::uint64_t> tail_samples(std::uint64_t N) {
  std::vector<std::uint64_t> out;
  const double lo = std::log(std::max<double>(1.0, static_cast<double>(N) / 10.0));
  const double hi = std::log(static_cast<double>(N));
  for (int i = 0; i <= 255; ++i) {
    const auto k = static_cast<std::uint64_t>(std::llround(std::exp(lo + (hi - lo) * i / 255.0)));
    if (out.empty() || k > out.back()) out.push_back(std::min(k, N));
  }
  return out;
}

inline void validate_rho(double rho) {
  if (!(rho >= 1.0 && rho <= 2.0)) throw InputError("check_sw1: rho must lie in [1, 2]");
}

/// Verdict for sum t_n given the tail slope of log t_n.
inline Verdict series_verdict(double slope) {
  if (std::isnan(slope)) return Verdict::inconclusive;
  if (slope < -1.0 - kSlopeBand) return Verdict::holds;
  if (slope > -1.0 + kSlopeBand) return Verdict::fails;
  return Verdict::inconclusive;
}

/// Verdict for "eventually non-increasing" given the tail slope and whether
/// the last decade saw an increase.
inline Verdict monotone_verdict(double slope, bool tail_violation) {
  if (std::isnan(slope)) return tail_violation ? Verdict::inconclusive : Verdict::holds;
  if (slope < -kSlopeBand) return Verdict::holds;
  if (slope > kSlopeBand) return Verdict::fails;
  return tail_violation ? Verdict::inconclusive : Verdict::holds;
}

inline Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::fails || b == Verdict::fails) return Verdict::fails;
  if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
  return Verdict::holds;
}

}  // namespace detail

// --- BASIC -----------------------------------------------------------------

inline ConditionReport check_basic(const Schedule& sched, std::uint64_t N = 10'000'000,
                                   MethodRequest method = MethodRequest::automatic) {
  ConditionReport r;
  r.condition = Condition::basic;
  const auto ex = sched.exponents();
  if (method == MethodRequest::analytic && !ex) {
    throw InputError("check_basic: analytic verdicts need a polynomial schedule");
  }
  if (ex && method != MethodRequest::partial_sum) {
    r.method = CheckMethod::analytic;
    const auto [theta, kappa] = *ex;
    if (theta == 0.0) {
      r.verdict = Verdict::fails;
      r.note = "gamma_n does not vanish";
    } else if (theta > 1.0) {
      r.verdict = Verdict::fails;
      r.note = "Gamma_n stays bounded";
    } else if (kappa > 1.0) {
      r.verdict = Verdict::fails;
      r.note = "H_n stays bounded";
    } else {
      r.verdict = Verdict::holds;
    }
    return r;
  }
  if (N < 1000) throw InputError("check_basic: partial-sum horizon must be at least 1000");
  r.method = CheckMethod::partial_sum;
  r.horizon = N;
  const auto samples = detail::tail_samples(N);
  std::size_t next = 0;
  std::vector<std::pair<double, double>> g_pts;
  std::vector<std::pair<double, double>> e_pts;
  CompensatedSum Gamma;
  for (std::uint64_t n = 1; n <= N; ++n) {
    const double g = sched.gamma(n);
    const double e = sched.eta(n);
    if (!(g > 0.0) || g > sched.gamma_bar() || !(e >= 0.0) || !std::isfinite(e)) {
      r.verdict = Verdict::fails;
      r.note = "invalid term at n = " + std::to_string(n);
      return r;
    }
    Gamma.add(g);
    if (next < samples.size() && samples[next] == n) {
      const double ln = std::log(static_cast<double>(n));
      g_pts.emplace_back(ln, std::log(g));
      if (e > 0.0) e_pts.emplace_back(ln, std::log(e));
      ++next;
    }
  }
  r.partial_sum = Gamma.value();
  const double gs = detail::ls_slope(g_pts);
  const double es = detail::ls_slope(e_pts);
  r.tail_slope = gs;
  if (gs > kSlopeBand) {
    r.verdict = Verdict::fails;
    r.note = "gamma_n does not vanish";
  } else if (gs < -1.0 - kSlopeBand) {
    r.verdict = Verdict::fails;
    r.note = "Gamma_n stays bounded";
  } else if (es < -1.0 - kSlopeBand) {
    r.verdict = Verdict::fails;
    r.note = "H_n stays bounded";
  } else if (gs < -kSlopeBand && gs > -1.0 + kSlopeBand && !(es < -1.0 + kSlopeBand)) {
    r.verdict = Verdict::holds;
  } else {
    r.verdict = Verdict::inconclusive;
  }
  return r;
}

// --- analytic verdicts for the polynomial family ---------------------------

inline ConditionReport analytic_sw1(double theta, double kappa, double rho, const EpsilonShape& eps) {
  ConditionReport r;
  r.condition = Condition::sw_i;
  r.method = CheckMethod::analytic;
  const double rr = eps.dominant();
  // eta_n / (H_n gamma_n) ~ n^{theta-1} (times 1/log n when kappa = 1)
  const bool log_weight = detail::near(kappa, 1.0);
  const double e1 = rho * (1.0 - theta) + rr * theta;
  const double e2 = theta * (1.0 - rr) - rho * (1.0 - theta);
  r.exponent = e1;
  Verdict series;
  if (detail::near(e1, 1.0)) {
    if (log_weight && rho > 1.0) {
      series = Verdict::holds;
    } else {
      series = Verdict::fails;
      r.note = "critical exponent: general term ~ 1/n, series diverges";
    }
  } else {
    series = e1 > 1.0 ? Verdict::holds : Verdict::fails;
  }
  Verdict mono = e2 <= 1e-12 ? Verdict::holds : Verdict::fails;
  if (mono == Verdict::fails) {
    if (!r.note.empty()) r.note += "; ";
    r.note += "ratio gamma^-1 eps (eta/(H gamma))^rho eventually increasing";
  }
  r.verdict = detail::combine(series, mono);
  return r;
}

inline ConditionReport analytic_sw2(double theta, double kappa) {
  ConditionReport r;
  r.condition = Condition::sw_ii;
  r.method = CheckMethod::analytic;
  if (theta <= kappa + 1e-15) {
    r.verdict = Verdict::holds;
    r.note = "eta_n/gamma_n non-increasing";
    r.exponent = std::numeric_limits<double>::infinity();
    return r;
  }
  // (eta/gamma) increments ~ n^{theta-kappa-1}, H_n ~ n^{1-kappa}
  const double e = 2.0 - theta;
  r.exponent = e;
  if (detail::near(e, 1.0)) {
    r.verdict = Verdict::fails;
    r.note = "critical exponent: general term ~ 1/n, series diverges";
  } else {
    r.verdict = e > 1.0 ? Verdict::holds : Verdict::fails;
  }
  return r;
}

inline ConditionReport analytic_avg_variation(double theta, double kappa) {
  ConditionReport r;
  r.condition = Condition::avg_variation;
  r.method = CheckMethod::analytic;
  if (theta <= kappa + 1e-15) {
    r.verdict = Verdict::holds;
    r.note = theta < kappa ? "bounded variation, H_n unbounded" : "eta_n/gamma_n constant";
    return r;
  }
  // cumulative variation ~ n^{theta-kappa}, H_n ~ n^{1-kappa}
  r.exponent = 1.0 - theta;
  if (theta < 1.0) {
    r.verdict = Verdict::holds;
  } else {
    r.verdict = Verdict::fails;
    r.note = "cumulative variation grows like H_n";
  }
  return r;
}

// --- partial sums ----------------------------------------------------------

struct ScanRequest {
  std::vector<Sw1Request> sw1;
  bool sw2 = false;
  bool avg_variation = false;
};

/// One pass over n = 1..N evaluating every requested condition by partial
/// sums and tail-slope fits. Reports come back in the order sw1..., sw2, avg.
inline std::vector<ConditionReport> scan_conditions(const Schedule& sched, std::uint64_t N,
                                                    const ScanRequest& req) {
  if (N < 1000) throw InputError("partial-sum horizon must be at least 1000");
  for (const auto& s : req.sw1) detail::validate_rho(s.rho);

  const auto ex = sched.exponents();
  const bool poly = ex.has_value();
  double theta = 0.0;
  double kappa = 0.0;
  double lg1 = 0.0;
  double le1 = 0.0;
  bool equal = std::holds_alternative<EqualToStep>(sched.weight_rule());
  if (poly) {
    std::tie(theta, kappa) = *ex;
    std::tie(lg1, le1) = sched.log_first_terms();
  }

  const auto samples = detail::tail_samples(N);
  const std::uint64_t tail_start = std::max<std::uint64_t>(1, N / 10);
  std::size_t next = 0;        // sample cursor for index n
  std::size_t next_ratio = 0;  // sample cursor for index n - 1

  struct Sw1State {
    CompensatedSum sum;
    double prev_lr = std::numeric_limits<double>::quiet_NaN();
    std::optional<std::uint64_t> violation;
    std::vector<std::pair<double, double>> term_pts;
    std::vector<std::pair<double, double>> ratio_pts;
  };
  std::vector<Sw1State> sw1(req.sw1.size());

  // SW_II / AVG_VAR share the ratio r_n = eta_n / gamma_n.
  CompensatedSum sw2_sum;
  bool ratio_monotone = true;
  double prev_aux = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::uint64_t> aux_violation;
  std::vector<std::pair<double, double>> sw2_pts;
  std::vector<std::pair<double, double>> aux_pts;
  CompensatedSum variation;
  std::vector<std::pair<double, double>> avg_pts;
  bool need_ratio = req.sw2 || req.avg_variation;

  CompensatedSum H;
  double prev_r = 1.0;  // eta_0 / gamma_0 = 1
  double prev_gamma = 0.0;
  double prev_H = 0.0;
  const std::uint64_t last = need_ratio ? N + 1 : N;

  for (std::uint64_t n = 1; n <= last; ++n) {
    double lg;
    double le;
    double gamma;
    double eta;
    if (poly) {
      const double ln = std::log(static_cast<double>(n));
      lg = lg1 - theta * ln;
      le = equal ? lg : le1 - kappa * ln;
      gamma = std::exp(lg);
      eta = equal ? gamma : std::exp(le);
    } else {
      gamma = sched.gamma(n);
      eta = sched.eta(n);
      lg = std::log(gamma);
      le = eta > 0.0 ? std::log(eta) : -std::numeric_limits<double>::infinity();
    }
    const double r = equal ? 1.0 : eta / gamma;

    if (need_ratio) {
      // increment d_{n-1} = r_n - r_{n-1}, attached to index n-1 (H_{n-1}, gamma_{n-1})
      const double d = r - prev_r;
      variation.add(std::abs(d));
      if (n >= 2) {
        const std::uint64_t k = n - 1;
        if (d > 0.0) ratio_monotone = false;
        const double inc = std::max(d, 0.0);
        const double term = inc / prev_H;
        sw2_sum.add(term);
        const double aux = term / prev_gamma;
        if (!std::isnan(prev_aux) && aux > prev_aux * (1.0 + 1e-12) && aux > 0.0) aux_violation = k;
        prev_aux = aux;
        if (next_ratio < samples.size() && samples[next_ratio] == k) {
          ++next_ratio;
          const double lk = std::log(static_cast<double>(k));
          if (term > 0.0) {
            sw2_pts.emplace_back(lk, std::log(term));
            aux_pts.emplace_back(lk, std::log(aux));
          }
          // variation through index k: |r_1 - 1| + sum_{j<k} |r_{j+1} - r_j|
          const double q = (variation.value() - std::abs(d)) / prev_H;
          if (q > 0.0) avg_pts.emplace_back(lk, std::log(q));
        }
      }
      prev_r = r;
    }

    if (n > N) break;
    H.add(eta);
    const double Hn = H.value();

    if (!req.sw1.empty()) {
      const double base = le - std::log(Hn) - lg;  // log(eta / (H gamma))
      const bool sample = next < samples.size() && samples[next] == n;
      const double ln = sample ? std::log(static_cast<double>(n)) : 0.0;
      for (std::size_t i = 0; i < req.sw1.size(); ++i) {
        const auto& q = req.sw1[i];
        auto& st = sw1[i];
        double log_eps;
        if (q.eps.exponents.size() == 1) {
          log_eps = q.eps.exponents.front() * lg;
        } else {
          double eps = 0.0;
          for (double re : q.eps.exponents) eps += std::exp(re * lg);
          log_eps = std::log(eps);
        }
        const double lt = q.rho * base + log_eps;
        st.sum.add(std::exp(lt));
        const double lr = lt - lg;
        if (!std::isnan(st.prev_lr) && lr > st.prev_lr + 1e-12 * std::max(1.0, std::abs(st.prev_lr))) {
          st.violation = n;
        }
        st.prev_lr = lr;
        if (sample) {
          st.term_pts.emplace_back(ln, lt);
          st.ratio_pts.emplace_back(ln, lr);
        }
      }
    }
    prev_gamma = gamma;
    prev_H = Hn;
    if (next < samples.size() && samples[next] == n) ++next;
  }

  std::vector<ConditionReport> out;
  for (std::size_t i = 0; i < req.sw1.size(); ++i) {
    auto& st = sw1[i];
    ConditionReport r;
    r.condition = Condition::sw_i;
    r.method = CheckMethod::partial_sum;
    r.horizon = N;
    r.partial_sum = st.sum.value();
    r.monotonicity_violation = st.violation;
    const double ts = detail::ls_slope(st.term_pts);
    const double rs = detail::ls_slope(st.ratio_pts);
    r.tail_slope = ts;
    const bool tail_violation = st.violation && *st.violation >= tail_start;
    r.verdict = detail::combine(detail::series_verdict(ts), detail::monotone_verdict(rs, tail_violation));
    if (r.verdict == Verdict::inconclusive) r.note = "tail trend within the slope band";
    out.push_back(r);
  }
  if (req.sw2) {
    ConditionReport r;
    r.condition = Condition::sw_ii;
    r.method = CheckMethod::partial_sum;
    r.horizon = N;
    r.partial_sum = sw2_sum.value();
    if (ratio_monotone) {
      r.verdict = Verdict::holds;
      r.note = "eta_n/gamma_n non-increasing up to N";
    } else {
      r.monotonicity_violation = aux_violation;
      const double ts = detail::ls_slope(sw2_pts);
      const double as = detail::ls_slope(aux_pts);
      r.tail_slope = ts;
      if (sw2_pts.empty()) {
        // increments vanish on the whole tail
        r.verdict = Verdict::holds;
        r.note = "eta_n/gamma_n non-increasing on [N/10, N]";
      } else {
        const bool tail_violation = aux_violation && *aux_violation >= tail_start;
        r.verdict = detail::combine(detail::series_verdict(ts), detail::monotone_verdict(as, tail_violation));
      }
      if (r.verdict == Verdict::inconclusive) r.note = "tail trend within the slope band";
    }
    out.push_back(r);
  }
  if (req.avg_variation) {
    ConditionReport r;
    r.condition = Condition::avg_variation;
    r.method = CheckMethod::partial_sum;
    r.horizon = N;
    r.partial_sum = variation.value();
    if (avg_pts.empty()) {
      r.verdict = Verdict::holds;
      r.note = "no variation";
    } else {
      const double s = detail::ls_slope(avg_pts);
      r.tail_slope = s;
      if (s < -kSlopeBand) {
        r.verdict = Verdict::holds;
      } else if (s > kSlopeBand) {
        r.verdict = Verdict::fails;
      } else {
        r.verdict = Verdict::inconclusive;
        r.note = "averaged variation levels off; limit not resolved";
      }
    }
    out.push_back(r);
  }
  return out;
}

// --- public checkers -------------------------------------------------------

namespace detail {

inline bool use_analytic(const Schedule& s, MethodRequest m, const char* who) {
  if (m == MethodRequest::analytic && !s.polynomial()) {
    throw InputError(std::string(who) + ": analytic verdicts need a polynomial schedule");
  }
  return m != MethodRequest::partial_sum && s.polynomial();
}

inline std::optional<ConditionReport> basic_failure(const Schedule& s, Condition c,
                                                    std::uint64_t N, MethodRequest m) {
  const auto b = check_basic(s, N, s.polynomial() ? MethodRequest::analytic : m);
  if (b.verdict != Verdict::fails) return std::nullopt;
  ConditionReport r = b;
  r.condition = c;
  r.note = "BASIC: " + b.note;
  return r;
}

}  // namespace detail

inline ConditionReport check_sw1(const Schedule& sched, double rho, const EpsilonShape& eps,
                                 std::uint64_t N = 10'000'000,
                                 MethodRequest method = MethodRequest::automatic) {
  detail::validate_rho(rho);
  if (auto f = detail::basic_failure(sched, Condition::sw_i, N, method)) return *f;
  if (detail::use_analytic(sched, method, "check_sw1")) {
    const auto [theta, kappa] = *sched.exponents();
    return analytic_sw1(theta, kappa, rho, eps);
  }
  return scan_conditions(sched, N, {{{rho, eps}}, false, false}).front();
}

inline ConditionReport check_sw2(const Schedule& sched, std::uint64_t N = 10'000'000,
                                 MethodRequest method = MethodRequest::automatic) {
  if (auto f = detail::basic_failure(sched, Condition::sw_ii, N, method)) return *f;
  if (detail::use_analytic(sched, method, "check_sw2")) {
    const auto [theta, kappa] = *sched.exponents();
    return analytic_sw2(theta, kappa);
  }
  return scan_conditions(sched, N, {{}, true, false}).front();
}

inline ConditionReport check_avg_variation(const Schedule& sched, std::uint64_t N = 10'000'000,
                                           MethodRequest method = MethodRequest::automatic) {
  if (auto f = detail::basic_failure(sched, Condition::avg_variation, N, method)) return *f;
  if (detail::use_analytic(sched, method, "check_avg_variation")) {
    const auto [theta, kappa] = *sched.exponents();
    return analytic_avg_variation(theta, kappa);
  }
  return scan_conditions(sched, N, {{}, false, true}).front();
}

}  // namespace ergodic
