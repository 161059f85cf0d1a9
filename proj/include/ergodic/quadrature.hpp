#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "ergodic/errors.hpp"

namespace ergodic::quadrature {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n nodes (Newton iteration on P_n).
inline GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw InputError("gauss_legendre: need at least one node");
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0;
    double p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -z;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

/// Cached rule; node generation for n = 1024 is not free.
inline const GaussLegendreRule& cached_gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

/// Nodes and weights mapping a rule onto [lo, hi]; either end may be infinite,
/// in which case the rational substitution z = lo + t / (1 - t) (or its
/// mirror images) is applied.
inline std::vector<std::pair<double, double>> mapped_nodes(double lo, double hi,
                                                           int n) {
  if (!(lo < hi)) throw InputError("mapped_nodes: empty interval");
  const auto& rule = cached_gauss_legendre(n);
  std::vector<std::pair<double, double>> out;
  out.reserve(rule.nodes.size());
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double s = rule.nodes[i];
    const double w = rule.weights[i];
    if (!lo_inf && !hi_inf) {
      const double half = 0.5 * (hi - lo);
      out.emplace_back(lo + half * (s + 1.0), w * half);
    } else if (!lo_inf) {
      const double t = 0.5 * (s + 1.0);  // t in (0, 1)
      const double z = lo + t / (1.0 - t);
      const double jac = 1.0 / ((1.0 - t) * (1.0 - t));
      out.emplace_back(z, 0.5 * w * jac);
    } else if (!hi_inf) {
      const double t = 0.5 * (s + 1.0);
      const double z = hi - t / (1.0 - t);
      const double jac = 1.0 / ((1.0 - t) * (1.0 - t));
      out.emplace_back(z, 0.5 * w * jac);
    } else {
      // z = s / (1 - s^2), s in (-1, 1)
      const double z = s / (1.0 - s * s);
      const double jac = (1.0 + s * s) / ((1.0 - s * s) * (1.0 - s * s));
      out.emplace_back(z, w * jac);
    }
  }
  return out;
}

inline double gauss_legendre_integrate(const std::function<double(double)>& f,
                                       double lo, double hi, int n = 1024) {
  double s = 0.0;
  for (const auto& [z, w] : mapped_nodes(lo, hi, n)) s += w * f(z);
  return s;
}

namespace detail {

inline double simpson_recurse(const std::function<double(double)>& f, double a,
                              double b, double fa, double fm, double fb,
                              double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson on a finite interval. `rel_tol` is relative to the
/// magnitude of a first coarse estimate, `abs_floor` guards vanishing integrals.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double rel_tol = 1e-9,
                               double abs_floor = 1e-300, int max_depth = 48) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(rel_tol * std::abs(whole), abs_floor);
  return detail::simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace ergodic::quadrature
