#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ergodic/errors.hpp"
#include "ergodic/linalg.hpp"
#include "ergodic/model.hpp"
#include "ergodic/summation.hpp"

namespace ergodic {

// ---------------------------------------------------------------------------
// Weighted quantile sketch
// ---------------------------------------------------------------------------

/// Exact weighted reservoir for the first `kReservoir` points, then a fixed
/// 4096-cell histogram over a range that doubles on demand (at most 20 times);
/// mass outside the final range lands in underflow/overflow cells pinned at the
/// recorded extremes.
class QuantileSketch {
 public:
  static constexpr std::size_t kReservoir = 10000;
  static constexpr int kCells = 4096;
  static constexpr int kMaxDoublings = 20;

  void add(double v, double w) {
    if (!std::isfinite(v)) throw NumericFault("QuantileSketch: non-finite value", Vector(), 0.0, 0);
    total_ += w;
    min_ = std::min(min_, v);
    max_ = std::max(max_, v);
    if (exact_) {
      points_.emplace_back(v, w);
      sorted_ = false;
      if (points_.size() > kReservoir) to_histogram();
      return;
    }
    insert_cell(v, w);
  }

  bool exact() const { return exact_; }
  bool empty() const { return total_ == 0.0 && points_.empty() && exact_; }
  double total_weight() const { return total_; }
  double min() const { return min_; }
  double max() const { return max_; }
  double underflow() const { return under_; }
  double overflow() const { return over_; }
  std::pair<double, double> range() const { return {lo_, lo_ + width_}; }
  const std::vector<double>& cells() const { return cells_; }

  /// Right-continuous inverse CDF Q(u) = inf{x : F(x) >= u}.
  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw InputError("quantile: u must lie in (0, 1)");
    if (!(total_ > 0.0)) throw InputError("quantile: sketch holds no mass");
    const double target = u * total_;
    if (exact_) {
      sort_points();
      double cum = 0.0;
      for (const auto& [x, w] : points_) {
        cum += w;
        if (cum >= target) return x;
      }
      return points_.back().first;
    }
    double cum = under_;
    if (cum >= target) return min_;
    const double h = width_ / kCells;
    for (int i = 0; i < kCells; ++i) {
      const double c = cells_[static_cast<std::size_t>(i)];
      if (c > 0.0 && cum + c >= target) {
        const double frac = (target - cum) / c;
        return std::clamp(lo_ + h * (i + frac), min_, max_);
      }
      cum += c;
    }
    return max_;
  }

  /// Empirical CDF F(t) = mass(<= t) / total.
  double cdf(double t) const {
    if (!(total_ > 0.0)) throw InputError("cdf: sketch holds no mass");
    if (exact_) {
      sort_points();
      const auto it = std::upper_bound(sorted_x_.begin(), sorted_x_.end(), t);
      const auto k = static_cast<std::size_t>(it - sorted_x_.begin());
      return k == 0 ? 0.0 : cum_w_[k - 1] / total_;
    }
    if (t < min_) return 0.0;
    if (t >= max_) return 1.0;
    double m = under_;
    const double h = width_ / kCells;
    const double pos = (t - lo_) / h;
    if (pos > 0.0) {
      const int full = std::min(kCells, static_cast<int>(std::floor(pos)));
      for (int i = 0; i < full; ++i) m += cells_[static_cast<std::size_t>(i)];
      if (full < kCells) m += cells_[static_cast<std::size_t>(full)] * (pos - full);
    }
    return std::clamp(m / total_, 0.0, 1.0);
  }

  /// Points where the empirical CDF has kinks or jumps.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    if (exact_) {
      sort_points();
      for (double x : sorted_x_) {
        if (out.empty() || x > out.back()) out.push_back(x);
      }
      return out;
    }
    out.push_back(min_);
    const double h = width_ / kCells;
    for (int i = 0; i <= kCells; ++i) {
      const double e = lo_ + h * i;
      if (e > min_ && e < max_) out.push_back(e);
    }
    out.push_back(max_);
    return out;
  }

  /// Whether the CDF is a step function (exact mode) or piecewise linear.
  bool step_cdf() const { return exact_; }

  void merge(const QuantileSketch& other) {
    if (other.total_ == 0.0 && other.points_.empty()) return;
    if (exact_ && other.exact_ && points_.size() + other.points_.size() <= kReservoir) {
      points_.insert(points_.end(), other.points_.begin(), other.points_.end());
      total_ += other.total_;
      min_ = std::min(min_, other.min_);
      max_ = std::max(max_, other.max_);
      sorted_ = false;
      return;
    }
    QuantileSketch b = other;
    if (b.exact_) b.to_histogram();
    if (exact_) to_histogram();
    const double lo = std::min(lo_, b.lo_);
    const double hi = std::max(lo_ + width_, b.lo_ + b.width_);
    QuantileSketch out;
    out.exact_ = false;
    out.lo_ = lo;
    out.width_ = hi - lo;
    out.cells_.assign(kCells, 0.0);
    out.doublings_ = std::max(doublings_, b.doublings_);
    out.rebin_from(*this);
    out.rebin_from(b);
    out.under_ = under_ + b.under_;
    out.over_ = over_ + b.over_;
    out.total_ = total_ + b.total_;
    out.min_ = std::min(min_, b.min_);
    out.max_ = std::max(max_, b.max_);
    *this = std::move(out);
  }

 private:
  void sort_points() const {
    if (sorted_) return;
    std::stable_sort(points_.begin(), points_.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    sorted_x_.resize(points_.size());
    cum_w_.resize(points_.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      sorted_x_[i] = points_[i].first;
      cum += points_[i].second;
      cum_w_[i] = cum;
    }
    sorted_ = true;
  }

  void to_histogram() {
    double lo = min_;
    double hi = max_;
    double pad = 0.1 * (hi - lo);
    if (!(pad > 0.0)) pad = 0.1 * std::abs(lo) + 1.0;
    lo_ = lo - pad;
    width_ = (hi + pad) - lo_;
    cells_.assign(kCells, 0.0);
    exact_ = false;
    for (const auto& [x, w] : points_) insert_cell(x, w);
    points_.clear();
    points_.shrink_to_fit();
    sorted_x_.clear();
    cum_w_.clear();
  }

  void insert_cell(double v, double w) {
    while ((v < lo_ || v >= lo_ + width_) && doublings_ < kMaxDoublings) grow_towards(v);
    if (v < lo_) {
      under_ += w;
      return;
    }
    if (v >= lo_ + width_) {
      over_ += w;
      return;
    }
    auto i = static_cast<int>((v - lo_) / width_ * kCells);
    i = std::clamp(i, 0, kCells - 1);
    cells_[static_cast<std::size_t>(i)] += w;
  }

  void grow_towards(double v) {
    ++doublings_;
    std::vector<double> merged(kCells, 0.0);
    const int half = kCells / 2;
    if (v >= lo_ + width_) {
      for (int i = 0; i < kCells; ++i) merged[static_cast<std::size_t>(i / 2)] += cells_[static_cast<std::size_t>(i)];
    } else {
      for (int i = 0; i < kCells; ++i) merged[static_cast<std::size_t>(half + i / 2)] += cells_[static_cast<std::size_t>(i)];
      lo_ -= width_;
    }
    width_ *= 2.0;
    cells_ = std::move(merged);
  }

  /// Spreads src's cells into this histogram proportionally to overlap.
  void rebin_from(const QuantileSketch& src) {
    const double hs = src.width_ / kCells;
    const double ht = width_ / kCells;
    for (int i = 0; i < kCells; ++i) {
      const double m = src.cells_[static_cast<std::size_t>(i)];
      if (m == 0.0) continue;
      const double a = src.lo_ + hs * i;
      const double b = a + hs;
      int j0 = std::clamp(static_cast<int>(std::floor((a - lo_) / ht)), 0, kCells - 1);
      int j1 = std::clamp(static_cast<int>(std::floor((b - lo_) / ht)), 0, kCells - 1);
      for (int j = j0; j <= j1; ++j) {
        const double ca = lo_ + ht * j;
        const double cb = ca + ht;
        const double ov = std::min(b, cb) - std::max(a, ca);
        if (ov > 0.0) cells_[static_cast<std::size_t>(j)] += m * ov / hs;
      }
    }
  }

  bool exact_ = true;
  mutable std::vector<std::pair<double, double>> points_;
  mutable std::vector<double> sorted_x_;
  mutable std::vector<double> cum_w_;
  mutable bool sorted_ = true;
  double total_ = 0.0;
  double min_ = std::numeric_limits<double>::infinity();
  double max_ = -std::numeric_limits<double>::infinity();
  double lo_ = 0.0;
  double width_ = 0.0;
  int doublings_ = 0;
  std::vector<double> cells_;
  double under_ = 0.0;
  double over_ = 0.0;
};

// ---------------------------------------------------------------------------
// Weighted empirical measure
// ---------------------------------------------------------------------------

struct TracePoint {
  std::uint64_t n = 0;
  double Gamma = 0.0;
  double H = 0.0;
  std::vector<double> values;
};

/// nu_n(f) = (1/H_n) sum_k eta_k f(x_{k-1}), updated recursively.
class EmpiricalAccumulator {
 public:
  EmpiricalAccumulator(int dim, std::vector<TestFunctional> fs, bool sketch = true)
      : dim_(dim),
        fs_(std::move(fs)),
        nu_(fs_.size(), 0.0),
        fmin_(fs_.size(), std::numeric_limits<double>::infinity()),
        fmax_(fs_.size(), -std::numeric_limits<double>::infinity()),
        scratch_(fs_.size(), 0.0) {
    if (dim < 1) throw InputError("EmpiricalAccumulator: dimension must be positive");
    for (const auto& f : fs_) {
      if (!f.eval) throw InputError("EmpiricalAccumulator: functional '" + f.label + "' has no evaluator");
    }
    if (sketch) sketches_.resize(static_cast<std::size_t>(dim));
  }

  void update(const Vector& x, double eta) {
    if (!(eta >= 0.0)) throw InputError("EmpiricalAccumulator: weight must be nonnegative");
    if (x.size() != dim_) throw InputError("EmpiricalAccumulator: point dimension mismatch");
    for (std::size_t i = 0; i < fs_.size(); ++i) {
      const double v = fs_[i].eval(x);
      if (!std::isfinite(v)) {
        throw NumericFault("functional '" + fs_[i].label + "' is not finite", x, 0.0, count_ + 1);
      }
      scratch_[i] = v;
    }
    H_.add(eta);
    ++count_;
    const double H = H_.value();
    for (std::size_t i = 0; i < fs_.size(); ++i) {
      const double v = scratch_[i];
      fmin_[i] = std::min(fmin_[i], v);
      fmax_[i] = std::max(fmax_[i], v);
      if (H > 0.0) {
        const double nu = nu_[i] + (eta / H) * (v - nu_[i]);
        nu_[i] = std::clamp(nu, fmin_[i], fmax_[i]);
      }
    }
    for (std::size_t c = 0; c < sketches_.size(); ++c) sketches_[c].add(x(static_cast<Eigen::Index>(c)), eta);
  }

  /// Combines b into this accumulator (H-weighted average, sketches cell-wise).
  void merge(const EmpiricalAccumulator& b) {
    if (b.dim_ != dim_ || b.fs_.size() != fs_.size()) {
      throw InputError("merge: accumulators have different shapes");
    }
    for (std::size_t i = 0; i < fs_.size(); ++i) {
      if (fs_[i].label != b.fs_[i].label) throw InputError("merge: functional lists differ");
    }
    if (sketches_.size() != b.sketches_.size()) throw InputError("merge: sketch settings differ");
    const double ha = H_.value();
    const double hb = b.H_.value();
    if (hb > 0.0) {
      if (ha > 0.0) {
        const double h = ha + hb;
        for (std::size_t i = 0; i < fs_.size(); ++i) nu_[i] = (ha * nu_[i] + hb * b.nu_[i]) / h;
      } else {
        nu_ = b.nu_;
      }
    }
    H_.add(hb);
    count_ += b.count_;
    for (std::size_t i = 0; i < fs_.size(); ++i) {
      fmin_[i] = std::min(fmin_[i], b.fmin_[i]);
      fmax_[i] = std::max(fmax_[i], b.fmax_[i]);
    }
    for (std::size_t c = 0; c < sketches_.size(); ++c) sketches_[c].merge(b.sketches_[c]);
  }

  void record_checkpoint(std::uint64_t n, double Gamma) { trace_.push_back({n, Gamma, H(), nu_}); }

  int dim() const { return dim_; }
  std::uint64_t count() const { return count_; }
  double H() const { return H_.value(); }
  const std::vector<TestFunctional>& functionals() const { return fs_; }
  const std::vector<double>& values() const { return nu_; }
  double value(std::size_t i) const { return nu_.at(i); }

  double value(const std::string& label) const {
    for (std::size_t i = 0; i < fs_.size(); ++i) {
      if (fs_[i].label == label) return nu_[i];
    }
    throw InputError("no functional labelled '" + label + "'");
  }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < fs_.size(); ++i) {
      if (fs_[i].label == label) return i;
    }
    throw InputError("no functional labelled '" + label + "'");
  }

  const std::vector<TracePoint>& trace() const { return trace_; }
  bool has_sketch() const { return !sketches_.empty(); }

  const QuantileSketch& sketch(int coord) const {
    if (sketches_.empty()) throw InputError("accumulator keeps no sketch");
    if (coord < 0 || coord >= dim_) throw InputError("sketch: coordinate out of range");
    return sketches_[static_cast<std::size_t>(coord)];
  }

  double quantile(int coord, double u) const {
    if (count_ == 0) throw InputError("quantile: accumulator is empty");
    return sketch(coord).quantile(u);
  }

 private:
  int dim_;
  std::vector<TestFunctional> fs_;
  std::vector<double> nu_;
  std::vector<double> fmin_;
  std::vector<double> fmax_;
  std::vector<double> scratch_;
  CompensatedSum H_;
  std::uint64_t count_ = 0;
  std::vector<QuantileSketch> sketches_;
  std::vector<TracePoint> trace_;
};

inline EmpiricalAccumulator merge(const EmpiricalAccumulator& a, const EmpiricalAccumulator& b) {
  EmpiricalAccumulator out = a;
  out.merge(b);
  return out;
}

// ---------------------------------------------------------------------------
// Wasserstein-1 against a reference CDF
// ---------------------------------------------------------------------------

struct W1Estimate {
  double value = 0.0;
  double error_bound = 0.0;
};

namespace detail {

/// int_0^h |g| for g linear from da to db, split at the sign change.
inline double abs_trapezoid(double da, double db, double h) {
  if (da * db >= 0.0) return 0.5 * h * (std::abs(da) + std::abs(db));
  const double t = h * std::abs(da) / (std::abs(da) + std::abs(db));
  return 0.5 * (std::abs(da) * t + std::abs(db) * (h - t));
}

inline double w1_on_grid(const QuantileSketch& sk, const std::function<double(double)>& ref_cdf,
                         double lo, double hi, int nodes) {
  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(nodes) + 16);
  for (int i = 0; i < nodes; ++i) t.push_back(lo + (hi - lo) * i / (nodes - 1));
  for (double b : sk.breakpoints()) t.push_back(b);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  double s = 0.0;
  double fe_a = sk.cdf(t[0]);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double a = t[i];
    const double b = t[i + 1];
    // left limits at b, so a jump sitting exactly on b does not leak into [a, b)
    const double b_minus = std::nextafter(b, a);
    const double fe_b = sk.step_cdf() ? fe_a : sk.cdf(b_minus);
    s += detail::abs_trapezoid(fe_a - ref_cdf(a), fe_b - ref_cdf(b_minus), b - a);
    fe_a = sk.cdf(b);
  }
  return s;
}

}  // namespace detail

/// int |F_emp - F_ref| by the trapezoid rule on uniform nodes plus the
/// sketch's breakpoints. The reference support is widened until its CDF is
/// within 1e-12 of 0 and 1. The error bound compares with a half-resolution grid.
inline W1Estimate wasserstein1_1d(const QuantileSketch& sk, const std::function<double(double)>& ref_cdf,
                                  int nodes = 4096) {
  if (nodes < 16) throw InputError("wasserstein1_1d: need at least 16 nodes");
  if (!(sk.total_weight() > 0.0)) throw InputError("wasserstein1_1d: empty sketch");
  double lo = sk.min();
  double hi = sk.max();
  double span = std::max(hi - lo, 1.0);
  for (int it = 0; it < 60 && ref_cdf(lo) > 1e-12; ++it) {
    lo -= span;
    span *= 2.0;
  }
  span = std::max(hi - lo, 1.0);
  for (int it = 0; it < 60 && 1.0 - ref_cdf(hi) > 1e-12; ++it) {
    hi += span;
    span *= 2.0;
  }
  const double fine = detail::w1_on_grid(sk, ref_cdf, lo, hi, nodes);
  const double coarse = detail::w1_on_grid(sk, ref_cdf, lo, hi, std::max(8, nodes / 2));
  const double tails = ref_cdf(lo) * 1.0 + (1.0 - ref_cdf(hi)) * 1.0;
  return {fine, std::abs(fine - coarse) + tails * (hi - lo)};
}

inline W1Estimate wasserstein1_1d(const EmpiricalAccumulator& acc, int coord,
                                  const std::function<double(double)>& ref_cdf, int nodes = 4096) {
  return wasserstein1_1d(acc.sketch(coord), ref_cdf, nodes);
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

inline void write_trace_header(std::ostream& os, bool with_replica = false) {
  os << "n,Gamma_n,H_n,label,nu_n_value";
  if (with_replica) os << ",replica";
  os << '\n';
}

inline void write_trace_csv(std::ostream& os, const EmpiricalAccumulator& acc, bool header = true,
                            std::optional<int> replica = std::nullopt) {
  if (header) write_trace_header(os, replica.has_value());
  const auto old = os.precision(17);
  for (const auto& tp : acc.trace()) {
    for (std::size_t i = 0; i < tp.values.size(); ++i) {
      os << tp.n << ',' << tp.Gamma << ',' << tp.H << ',' << acc.functionals()[i].label << ','
         << tp.values[i];
      if (replica) os << ',' << *replica;
      os << '\n';
    }
  }
  os.precision(old);
}

inline void write_quantile_csv(std::ostream& os, const EmpiricalAccumulator& acc,
                               const std::vector<double>& us = {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99}) {
  os << "coordinate,u,quantile\n";
  const auto old = os.precision(17);
  for (int c = 0; c < acc.dim(); ++c) {
    for (double u : us) os << c << ',' << u << ',' << acc.quantile(c, u) << '\n';
  }
  os.precision(old);
}

}  // namespace ergodic
