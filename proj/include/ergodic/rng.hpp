#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "ergodic/errors.hpp"

namespace ergodic {

using Rng = std::mt19937_64;

/// Engine for (seed, stream) pairs. Distinct streams are seeded through
/// seed_seq so that replicas of one run never share a sequence.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream & 0xffffffffu),
                    static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
  return Rng(seq);
}

enum class IncrementMode { gaussian, rademacher };

/// How the iterated Brownian integrals W^{i,j} of the Milstein step are drawn.
enum class LevyAreaMode { exact_1d, commutative, centered_substitute };

inline IncrementMode parse_increment_mode(const std::string& s) {
  if (s == "gaussian") return IncrementMode::gaussian;
  if (s == "rademacher") return IncrementMode::rademacher;
  throw InputError("unknown increment mode '" + s + "'");
}

inline LevyAreaMode parse_levy_area_mode(const std::string& s) {
  if (s == "exact1d") return LevyAreaMode::exact_1d;
  if (s == "commutative") return LevyAreaMode::commutative;
  if (s == "substitute") return LevyAreaMode::centered_substitute;
  throw InputError("unknown levy area mode '" + s + "'");
}

inline std::string to_string(IncrementMode m) {
  return m == IncrementMode::gaussian ? "gaussian" : "rademacher";
}

inline std::string to_string(LevyAreaMode m) {
  switch (m) {
    case LevyAreaMode::exact_1d: return "exact1d";
    case LevyAreaMode::commutative: return "commutative";
    case LevyAreaMode::centered_substitute: return "substitute";
  }
  return "?";
}

/// Source of the i.i.d. driving variables U_n (matching the first two moments
/// of N(0, I_d)), the iterated-integral surrogates W_n, and the Poisson /
/// uniform draws of the jump scheme.
class IncrementGenerator {
 public:
  IncrementGenerator(std::uint64_t seed, std::uint64_t stream_id,
                     IncrementMode mode = IncrementMode::gaussian,
                     LevyAreaMode levy = LevyAreaMode::commutative)
      : seed_(seed),
        stream_(stream_id),
        mode_(mode),
        levy_(levy),
        engine_(make_rng(seed, stream_id)) {}

  IncrementMode mode() const { return mode_; }
  LevyAreaMode levy_area_mode() const { return levy_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  double scalar() {
    if (mode_ == IncrementMode::gaussian) return normal_(engine_);
    return (engine_() >> 63) ? 1.0 : -1.0;
  }

  Eigen::VectorXd brownian(int dim) {
    Eigen::VectorXd u(dim);
    for (int i = 0; i < dim; ++i) u(i) = scalar();
    return u;
  }

  /// W^{i,j} for the given U under the configured Levy-area mode.
  Eigen::MatrixXd iterated(const Eigen::VectorXd& u) {
    const auto d = u.size();
    Eigen::MatrixXd w(d, d);
    switch (levy_) {
      case LevyAreaMode::exact_1d:
        if (d != 1) throw ConfigurationError("exact1d Levy area mode needs d = 1");
        w(0, 0) = 0.5 * (u(0) * u(0) - 1.0);
        break;
      case LevyAreaMode::commutative:
        for (Eigen::Index i = 0; i < d; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) {
            w(i, j) = 0.5 * (u(i) * u(j) - (i == j ? 1.0 : 0.0));
          }
        }
        break;
      case LevyAreaMode::centered_substitute:
        for (Eigen::Index i = 0; i < d; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) {
            if (i == j) {
              w(i, j) = 0.5 * (u(i) * u(i) - 1.0);
            } else {
              // independent, centered, E[w^2] = 1/2
              w(i, j) = ((engine_() >> 63) ? 1.0 : -1.0) * std::sqrt(0.5);
            }
          }
        }
        break;
    }
    return w;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
  }

  Rng& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  IncrementMode mode_;
  LevyAreaMode levy_;
  Rng engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ergodic
