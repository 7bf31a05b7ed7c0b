#pragma once

// Reference implementations used only for verification (tests and the
// `check` subcommand). They recompute stresses by explicitly factorizing the
// pre-deformation and composing deformation gradients, a path the solver
// never takes, so agreement is a genuine cross-check.

#include "inveldes/constitutive.hpp"

namespace inveldes::oracles {

/// Lower-triangular Cholesky factor of an SPD tensor.
template <int D>
Mat<D> cholesky(const Mat<D>& a) {
  Eigen::LLT<Mat<D>> llt(a);
  if (llt.info() != Eigen::Success) throw NonSPDPredeformation("Cholesky factorization failed");
  return llt.matrixL();
}

/// Explicit total deformation gradient F = Fbar Ftilde^-1 Fring with
/// Fring = chol(Bring).
template <int D>
Mat<D> total_deformation(const Mat<D>& grad_r, const Mat<D>& grad_u, const Mat<D>& Bring) {
  const Mat<D> Ftilde = Mat<D>::Identity() + grad_r;
  const Mat<D> Fbar = Mat<D>::Identity() + grad_u;
  return Fbar * Ftilde.inverse() * cholesky<D>(Bring);
}

/// Classical Lagrangian St. Venant-Kirchhoff first Piola-Kirchhoff stress
/// about a stress-free reference: P = F (lambda tr(E) I + 2 mu E - a dtheta I).
template <int D>
Mat<D> textbook_stvk(const Mat<D>& F, double lambda, double mu, double alpha = 0.0,
                     double dtheta = 0.0) {
  const Mat<D> E = 0.5 * (F.transpose() * F - Mat<D>::Identity());
  const Mat<D> S =
      lambda * E.trace() * Mat<D>::Identity() + 2.0 * mu * E - alpha * dtheta * Mat<D>::Identity();
  return F * S;
}

/// Classical Neo-Hooke first Piola-Kirchhoff stress about a stress-free
/// reference, from the Cauchy-stress form J sigma = 2 d1 J(J-1) I
/// + 2 c1 J^(-2/3) dev(B) - a dtheta B with B = F F^T. The deviator uses the
/// 3D trace; for D = 2 the out-of-plane stretch is 1.
template <int D>
Mat<D> textbook_neohooke(const Mat<D>& F, double d1, double c1, double alpha = 0.0,
                         double dtheta = 0.0) {
  const Mat<D> B = F * F.transpose();
  const double J = F.determinant();
  const double tr3 = (D == 2) ? B.trace() + 1.0 : B.trace();
  const Mat<D> dev = B - (tr3 / 3.0) * Mat<D>::Identity();
  const Mat<D> Jsigma = 2.0 * d1 * J * (J - 1.0) * Mat<D>::Identity() +
                        2.0 * c1 * std::pow(J, -2.0 / 3.0) * dev - alpha * dtheta * B;
  return Jsigma * F.inverse().transpose();
}

/// Pullback of the St. Venant-Kirchhoff law to the reference configuration
/// along the factorized chain P = Jtilde Jring^-1 F Shat Fring^T Ftilde^-T.
template <int D>
Mat<D> pullback_stvk(const Mat<D>& grad_r, const Mat<D>& grad_u, const Mat<D>& Bring,
                     double theta, double theta0, const MaterialModel& m) {
  const Mat<D> Ftilde = Mat<D>::Identity() + grad_r;
  const Mat<D> Fbar = Mat<D>::Identity() + grad_u;
  const Mat<D> Fring = cholesky<D>(Bring);
  const Mat<D> F = Fbar * Ftilde.inverse() * Fring;
  const Mat<D> E = 0.5 * (F.transpose() * F - Mat<D>::Identity());
  const Mat<D> Shat = m.lambda * E.trace() * Mat<D>::Identity() + 2.0 * m.mu * E -
                      m.alpha * (theta - theta0) * Mat<D>::Identity();
  const double scale = Ftilde.determinant() / Fring.determinant();
  return scale * F * Shat * Fring.transpose() * Ftilde.inverse().transpose();
}

/// Pullback of the Neo-Hooke law: P = Jtilde Jring^-1 (J sigma) Fbar^-T with
/// J and B taken from the explicitly composed F.
template <int D>
Mat<D> pullback_neohooke(const Mat<D>& grad_r, const Mat<D>& grad_u, const Mat<D>& Bring,
                         double theta, double theta0, const MaterialModel& m) {
  const Mat<D> Ftilde = Mat<D>::Identity() + grad_r;
  const Mat<D> Fbar = Mat<D>::Identity() + grad_u;
  const Mat<D> Fring = cholesky<D>(Bring);
  const Mat<D> F = Fbar * Ftilde.inverse() * Fring;
  const Mat<D> B = F * F.transpose();
  const double J = F.determinant();
  const double tr3 = (D == 2) ? B.trace() + 1.0 : B.trace();
  const Mat<D> dev = B - (tr3 / 3.0) * Mat<D>::Identity();
  const Mat<D> Jsigma = 2.0 * m.d1 * J * (J - 1.0) * Mat<D>::Identity() +
                        2.0 * m.c1 * std::pow(J, -2.0 / 3.0) * dev -
                        m.alpha * (theta - theta0) * B;
  const double scale = Ftilde.determinant() / Fring.determinant();
  return scale * Jsigma * Fbar.inverse().transpose();
}

}  // namespace inveldes::oracles
