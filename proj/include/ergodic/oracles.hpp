#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ergodic/errors.hpp"
#include "ergodic/quadrature.hpp"

// Reference computations for the acceptance runs. Nothing here touches the
// scheme or accumulator code, so agreement with them is evidence.

namespace ergodic::oracles {

struct Density1D {
  std::vector<double> grid;
  std::vector<double> values;      // normalized density at grid points
  std::vector<double> cumulative;  // CDF at grid points
};

struct MomentSet {
  std::vector<std::pair<int, double>> moments;  // (monomial degree, value)
};

struct CdfLaw {
  std::function<double(double)> cdf;
};

struct ReferenceLaw {
  std::variant<Density1D, MomentSet, CdfLaw> kind;

  bool has_cdf() const { return !std::holds_alternative<MomentSet>(kind); }

  double cdf(double x) const {
    if (const auto* c = std::get_if<CdfLaw>(&kind)) return c->cdf(x);
    const auto* d = std::get_if<Density1D>(&kind);
    if (!d) throw InputError("reference law has no CDF");
    const auto& g = d->grid;
    if (x <= g.front()) return 0.0;
    if (x >= g.back()) return 1.0;
    const auto i = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), x) - g.begin()) - 1;
    const double h = x - g[i];
    const double w = g[i + 1] - g[i];
    const double slope = (d->values[i + 1] - d->values[i]) / w;
    return std::clamp(d->cumulative[i] + h * (d->values[i] + 0.5 * slope * h), 0.0, 1.0);
  }

  double density(double x) const {
    const auto* d = std::get_if<Density1D>(&kind);
    if (!d) throw InputError("reference law has no tabulated density");
    const auto& g = d->grid;
    if (x < g.front() || x > g.back()) return 0.0;
    auto i = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), x) - g.begin());
    if (i == g.size()) return d->values.back();
    i -= 1;
    const double t = (x - g[i]) / (g[i + 1] - g[i]);
    return (1.0 - t) * d->values[i] + t * d->values[i + 1];
  }

  double moment(int degree) const {
    if (const auto* m = std::get_if<MomentSet>(&kind)) {
      for (const auto& [k, v] : m->moments) {
        if (k == degree) return v;
      }
      throw InputError("reference law has no moment of degree " + std::to_string(degree));
    }
    const auto* d = std::get_if<Density1D>(&kind);
    if (!d) throw InputError("reference law has no moments");
    // Simpson on consecutive cell pairs (uneven spacing allowed), trapezoid on a leftover cell
    const auto& g = d->grid;
    const auto& v = d->values;
    auto h = [&](std::size_t i) { return std::pow(g[i], degree) * v[i]; };
    double s = 0.0;
    std::size_t i = 0;
    for (; i + 2 < g.size(); i += 2) {
      const double h0 = g[i + 1] - g[i];
      const double h1 = g[i + 2] - g[i + 1];
      const double w = h0 + h1;
      s += w / 6.0 *
           ((2.0 - h1 / h0) * h(i) + w * w / (h0 * h1) * h(i + 1) + (2.0 - h0 / h1) * h(i + 2));
    }
    if (i + 1 < g.size()) s += 0.5 * (g[i + 1] - g[i]) * (h(i) + h(i + 1));
    return s;
  }
};

inline ReferenceLaw normal_law(double mean = 0.0, double sd = 1.0) {
  return {CdfLaw{[mean, sd](double x) { return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2)); }}};
}

/// Invariant density of dX = b(X) dt + sigma(X) dW on the grid hull:
/// m(x) proportional to sigma(x)^{-2} exp(int_{x0}^x 2 b / sigma^2), x0 the
/// hull midpoint, integrated by adaptive Simpson cell by cell.
inline ReferenceLaw stationary_density_1d(const std::function<double(double)>& b,
                                          const std::function<double(double)>& sigma,
                                          std::vector<double> grid, double rel_tol = 1e-9) {
  if (grid.size() < 3) throw InputError("stationary_density_1d: grid needs at least 3 points");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (double x : grid) {
    if (!(sigma(x) > 0.0)) throw InputError("stationary_density_1d: sigma must be positive on the grid");
  }
  const std::size_t n = grid.size();
  const double x0 = 0.5 * (grid.front() + grid.back());
  auto speed = [&](double x) {
    const double s = sigma(x);
    return 2.0 * b(x) / (s * s);
  };

  // scale function exponent S(x_i) = int_{x0}^{x_i} 2 b / sigma^2
  const auto mid = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), x0) - grid.begin());
  std::vector<double> S(n, 0.0);
  {
    // anchor: integrate from x0 to grid[mid] (grid[mid] >= x0)
    const double base = quadrature::adaptive_simpson(speed, x0, grid[mid], rel_tol, 1e-14);
    S[mid] = base;
    for (std::size_t i = mid + 1; i < n; ++i) {
      S[i] = S[i - 1] + quadrature::adaptive_simpson(speed, grid[i - 1], grid[i], rel_tol, 1e-14);
    }
    for (std::size_t i = mid; i-- > 0;) {
      S[i] = S[i + 1] - quadrature::adaptive_simpson(speed, grid[i], grid[i + 1], rel_tol, 1e-14);
    }
  }
  const double smax = *std::max_element(S.begin(), S.end());

  // unnormalized m on each cell, with S(x) = S(x_i) + int_{x_i}^x
  std::vector<double> cell_mass(n - 1, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = grid[i];
    const double Sa = S[i] - smax;
    auto m = [&](double x) {
      const double s = sigma(x);
      const double e = Sa + (x == a ? 0.0 : quadrature::adaptive_simpson(speed, a, x, rel_tol, 1e-14));
      return std::exp(e) / (s * s);
    };
    cell_mass[i] = quadrature::adaptive_simpson(m, a, grid[i + 1], rel_tol, 1e-300);
  }
  double total = 0.0;
  for (double c : cell_mass) total += c;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw InputError("no invariant probability detected on grid");
  }
  Density1D d;
  d.grid = grid;
  d.values.resize(n);
  d.cumulative.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sigma(grid[i]);
    d.values[i] = std::exp(S[i] - smax) / (s * s) / total;
  }
  // mass piling up at an edge where the density does not decay: the grid
  // truncates a non-integrable m
  const bool low_edge = cell_mass.front() / total > 1e-6 && d.values[0] >= d.values[1];
  const bool high_edge = cell_mass.back() / total > 1e-6 && d.values[n - 1] >= d.values[n - 2];
  if (low_edge || high_edge) throw InputError("no invariant probability detected on grid");
  double cum = 0.0;
  d.cumulative[0] = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    cum += cell_mass[i] / total;
    d.cumulative[i + 1] = cum;
  }
  return {std::move(d)};
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(lo < hi)) throw InputError("uniform_grid: invalid range");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

/// Stationary first two moments of dX = -theta X dt + dJ, J compound Poisson
/// with intensity `rate` and jump moments m1, m2, from nu(A x) = nu(A x^2) = 0.
inline ReferenceLaw levy_ou_moments(double theta, double rate, double jump_m1, double jump_m2) {
  if (!(theta > 0.0)) throw InputError("levy_ou_moments: theta must be positive");
  if (!(rate >= 0.0)) throw InputError("levy_ou_moments: rate must be nonnegative");
  const double mu1 = rate * jump_m1 / theta;
  const double mu2 = (2.0 * rate * jump_m1 * mu1 + rate * jump_m2) / (2.0 * theta);
  return {MomentSet{{{1, mu1}, {2, mu2}}}};
}

/// sum_k w_k f(s_k) / sum_k w_k, accumulated in long double.
template <typename State, typename F>
double batch_empirical(const std::vector<State>& states, const std::vector<double>& weights, F&& f) {
  if (states.size() != weights.size()) throw InputError("batch_empirical: length mismatch");
  long double num = 0.0L;
  long double den = 0.0L;
  for (std::size_t k = 0; k < states.size(); ++k) {
    num += static_cast<long double>(weights[k]) * static_cast<long double>(f(states[k]));
    den += static_cast<long double>(weights[k]);
  }
  if (!(den > 0.0L)) throw InputError("batch_empirical: weights sum to zero");
  return static_cast<double>(num / den);
}

inline void write_reference_csv(std::ostream& os, const ReferenceLaw& law) {
  const auto* d = std::get_if<Density1D>(&law.kind);
  const auto old = os.precision(17);
  if (d) {
    os << "x,density,cdf\n";
    for (std::size_t i = 0; i < d->grid.size(); ++i) {
      os << d->grid[i] << ',' << d->values[i] << ',' << d->cumulative[i] << '\n';
    }
  } else if (const auto* m = std::get_if<MomentSet>(&law.kind)) {
    os << "degree,moment\n";
    for (const auto& [k, v] : m->moments) os << k << ',' << v << '\n';
  } else {
    throw InputError("write_reference_csv: closed-form CDF laws have no table");
  }
  os.precision(old);
}

}  // namespace ergodic::oracles
