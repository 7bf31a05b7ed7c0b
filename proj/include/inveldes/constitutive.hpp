#pragma once

#include <array>

#include "inveldes/kinematics.hpp"

namespace inveldes {

enum class Law { StVenantKirchhoff, NeoHooke };

/// Constitutive parameter set: elastic moduli of the selected law, thermal
/// stress coefficient, conductivity, and the virtual Lame parameters of the
/// smoothing material.
struct MaterialModel {
  Law law = Law::StVenantKirchhoff;
  double lambda = 0.0;  // StVK first Lame parameter
  double mu = 0.0;      // StVK shear modulus
  double d1 = 0.0;      // Neo-Hooke volumetric modulus
  double c1 = 0.0;      // Neo-Hooke deviatoric modulus
  double alpha = 0.0;   // thermal stress coefficient
  double kappa = 1.0;   // thermal conductivity
  double lambda_phi = 1.0;  // smoothing material, dilatational
  double mu_phi = 1.0;      // smoothing material, shear

  void validate() const {
    if (law == Law::StVenantKirchhoff && !(mu > 0.0))
      throw ConfigError("material: mu must be positive");
    if (law == Law::NeoHooke && !(c1 > 0.0 && d1 > 0.0))
      throw ConfigError("material: c1 and d1 must be positive");
    if (!(kappa > 0.0)) throw ConfigError("material: kappa must be positive");
    if (!(mu_phi > 0.0)) throw ConfigError("material: mu_phi must be positive");
  }
};

/// First Piola-Kirchhoff stress relating equilibrium-configuration forces to
/// reference-configuration surface elements, plus the Cauchy stress derived
/// from it for output.
template <int D>
struct StressResult {
  Mat<D> P;
  Mat<D> cauchy;  // P Fbar^T / Jbar
};

namespace detail {
template <int D>
StressResult<D> finish(const Mat<D>& P, const DeformationState<D>& ds) {
  StressResult<D> s;
  s.P = P;
  s.cauchy = P * ds.Fbar.transpose() / ds.Jbar;
  return s;
}
}  // namespace detail

/// Thermoelastic St. Venant-Kirchhoff stress pulled back to the reference
/// configuration:
///   P = Jtilde/Jring * (lambda/2 tr(B-I) I + mu (B-I) - alpha (theta-theta0) I) * A.
/// In 2D this is the plane-strain restriction of the 3D law (the embedded
/// out-of-plane stretch is 1, so the 2D trace equals the 3D one).
template <int D>
StressResult<D> stress_stvk(const CompositeKinematics<D>& ck, const DeformationState<D>& ds,
                            double theta, double theta0, const MaterialModel& m) {
  const Mat<D> Bm1 = ck.B - Mat<D>::Identity();
  const Mat<D> core = (0.5 * m.lambda * Bm1.trace() - m.alpha * (theta - theta0)) * Mat<D>::Identity() +
                      m.mu * Bm1;
  return detail::finish<D>((ds.Jtilde / ds.Jring) * (core * ck.A), ds);
}

/// Thermoelastic Neo-Hooke stress pulled back to the reference configuration:
///   P = Jtilde/Jring * (2 d1 J(J-1) I + 2 c1 J^(-2/3) dev(B) - alpha (theta-theta0) B) * Fbar^-T.
/// The deviator always uses the 3D trace; 2D runs embed plane-strain
/// kinematics with unit out-of-plane stretch (B_33 = 1).
template <int D>
StressResult<D> stress_neohooke(const CompositeKinematics<D>& ck, const DeformationState<D>& ds,
                                double theta, double theta0, const MaterialModel& m) {
  const double J = ck.J;
  const double tr3 = (D == 2) ? ck.B.trace() + 1.0 : ck.B.trace();
  const Mat<D> dev = ck.B - (tr3 / 3.0) * Mat<D>::Identity();
  const Mat<D> core = 2.0 * m.d1 * J * (J - 1.0) * Mat<D>::Identity() +
                      2.0 * m.c1 * std::pow(J, -2.0 / 3.0) * dev -
                      m.alpha * (theta - theta0) * ck.B;
  const Mat<D> Fbar_invT = ds.Fbar.inverse().transpose();
  return detail::finish<D>((ds.Jtilde / ds.Jring) * (core * Fbar_invT), ds);
}

/// Dispatch on the material's law selector.
template <int D>
StressResult<D> evaluate_stress(const MaterialModel& m, const Mat<D>& grad_r, const Mat<D>& grad_u,
                                const Mat<D>& Bring, double theta, double theta0) {
  const auto ds = deformation_state<D>(grad_r, grad_u, Bring, Vec<D>::Zero());
  const auto ck = composite<D>(ds);
  return m.law == Law::StVenantKirchhoff ? stress_stvk<D>(ck, ds, theta, theta0, m)
                                         : stress_neohooke<D>(ck, ds, theta, theta0, m);
}

/// Linear-elastic virtual stress of the smoothing equation:
///   sigma_phi = lambda_phi (div r) I + 2 mu_phi sym(grad r).
template <int D>
Mat<D> smoothing_stress(const Mat<D>& grad_r, const MaterialModel& m) {
  return m.lambda_phi * grad_r.trace() * Mat<D>::Identity() + 2.0 * m.mu_phi * sym<D>(grad_r);
}

/// Heat flux, linear in the reference-configuration temperature gradient.
template <int D>
Vec<D> heat_flux(const Vec<D>& grad_theta, const MaterialModel& m) {
  return -m.kappa * grad_theta;
}

/// Consistent tangent blocks of P, computed by central finite differences.
/// dP_dgrad_r[k][l] is the derivative of P with respect to entry (k,l) of
/// grad r, and likewise for grad u.
template <int D>
struct StressTangent {
  std::array<std::array<Mat<D>, D>, D> dP_dgrad_r;
  std::array<std::array<Mat<D>, D>, D> dP_dgrad_u;
  Mat<D> dP_dtheta;
};

/// Central differences with step h * max(1, |entry|) per component.
/// InvertedElement from a perturbed state propagates; callers typically halve
/// h and retry (up to 3 times).
template <int D>
StressTangent<D> stress_tangent_fd(const MaterialModel& m, const Mat<D>& grad_r,
                                   const Mat<D>& grad_u, const Mat<D>& Bring, double theta,
                                   double theta0, double h = 1e-6) {
  StressTangent<D> t;
  auto diff_wrt = [&](const Mat<D>& base, auto reeval) {
    std::array<std::array<Mat<D>, D>, D> out;
    for (int k = 0; k < D; ++k)
      for (int l = 0; l < D; ++l) {
        const double step = h * std::max(1.0, std::abs(base(k, l)));
        Mat<D> plus = base, minus = base;
        plus(k, l) += step;
        minus(k, l) -= step;
        out[k][l] = (reeval(plus).P - reeval(minus).P) / (2.0 * step);
      }
    return out;
  };
  t.dP_dgrad_r = diff_wrt(grad_r, [&](const Mat<D>& g) {
    return evaluate_stress<D>(m, g, grad_u, Bring, theta, theta0);
  });
  t.dP_dgrad_u = diff_wrt(grad_u, [&](const Mat<D>& g) {
    return evaluate_stress<D>(m, grad_r, g, Bring, theta, theta0);
  });
  const double step = h * std::max(1.0, std::abs(theta));
  t.dP_dtheta = (evaluate_stress<D>(m, grad_r, grad_u, Bring, theta + step, theta0).P -
                 evaluate_stress<D>(m, grad_r, grad_u, Bring, theta - step, theta0).P) /
                (2.0 * step);
  return t;
}

}  // namespace inveldes
