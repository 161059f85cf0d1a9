#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ergodic/errors.hpp"

namespace ergodic {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace linalg {

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
/// Iterates until the off-diagonal Frobenius norm drops below `tol`
/// (scaled by max(1, |A|_F)). Returned in ascending order.
inline std::vector<double> jacobi_eigenvalues(const Matrix& sym,
                                              double tol = 1e-12,
                                              int max_sweeps = 100) {
  if (sym.rows() != sym.cols()) {
    throw InputError("jacobi_eigenvalues: matrix is not square");
  }
  const Eigen::Index n = sym.rows();
  Matrix a = 0.5 * (sym + sym.transpose());
  const double scale = std::max(1.0, a.norm());

  auto off_norm = [&]() {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i != j) s += a(i, j) * a(i, j);
      }
    }
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps && off_norm() > tol * scale; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

/// sup{eigenvalues, 0}
inline double positive_top_eigenvalue(const Matrix& sym) {
  const auto eig = jacobi_eigenvalues(sym);
  return std::max(0.0, eig.back());
}

inline double spectral_norm_symmetric(const Matrix& sym) {
  const auto eig = jacobi_eigenvalues(sym);
  return std::max(std::abs(eig.front()), std::abs(eig.back()));
}

/// ln det of a symmetric positive definite matrix through its Cholesky factor;
/// empty when the factorization breaks down.
inline std::optional<double> log_det_spd(const Matrix& sym) {
  Eigen::LLT<Matrix> llt(0.5 * (sym + sym.transpose()));
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Matrix& l = llt.matrixL();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double d = l(i, i);
    if (!(d > 0.0)) return std::nullopt;
    s += std::log(d);
  }
  return 2.0 * s;
}

}  // namespace linalg
}  // namespace ergodic
