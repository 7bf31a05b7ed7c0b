#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "inveldes/errors.hpp"

namespace inveldes {

template <int D>
using Mat = Eigen::Matrix<double, D, D>;
template <int D>
using Vec = Eigen::Matrix<double, D, 1>;

using Vector = Eigen::VectorXd;

/// Closed-form inverse for 2x2 / 3x3; throws InvertedElement on det <= 0.
template <int D>
inline Mat<D> inverse_checked(const Mat<D>& a, double* det_out = nullptr) {
  const double det = a.determinant();
  if (!(det > 0.0)) throw InvertedElement("non-positive determinant " + std::to_string(det));
  if (det_out) *det_out = det;
  return a.inverse();
}

/// Symmetrize away round-off: (a + a^T) / 2.
template <int D>
inline Mat<D> sym(const Mat<D>& a) {
  return 0.5 * (a + a.transpose());
}

/// SPD test via leading principal minors (exact for D <= 3).
template <int D>
inline bool is_spd(const Mat<D>& a, double tol = 1e-10) {
  const double scale = a.cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, scale)) return false;
  if (a(0, 0) <= 0.0) return false;
  if constexpr (D >= 2) {
    if (a.template topLeftCorner<2, 2>().determinant() <= 0.0) return false;
  }
  if constexpr (D >= 3) {
    if (a.determinant() <= 0.0) return false;
  }
  return true;
}

/// Spectral norm (largest |eigenvalue|) of a symmetric tensor.
template <int D>
inline double spectral_norm(const Mat<D>& a) {
  if constexpr (D == 2) {
    const double m = 0.5 * (a(0, 0) + a(1, 1));
    const double h = std::hypot(0.5 * (a(0, 0) - a(1, 1)), 0.5 * (a(0, 1) + a(1, 0)));
    return std::max(std::abs(m + h), std::abs(m - h));
  } else {
    Eigen::SelfAdjointEigenSolver<Mat<D>> es(sym<D>(a));
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
}

}  // namespace inveldes
