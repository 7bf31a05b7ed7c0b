#pragma once

#include "inveldes/tensor.hpp"

namespace inveldes {

/// Deformation measures of a single evaluation point, connecting the
/// reference configuration to the initial (r) and equilibrium (u)
/// configurations, plus the pre-deformation carried as the symmetric
/// left Cauchy-Green tensor Bring (the square F of the pre-deformation is
/// never formed in the solver path).
template <int D>
struct DeformationState {
  Mat<D> Ftilde;      // I + grad r
  Mat<D> Fbar;        // I + grad u
  Mat<D> Bring;       // pre-deformation left Cauchy-Green tensor
  Vec<D> grad_theta;  // temperature gradient in reference coordinates
  double Jtilde = 1.0;
  double Jbar = 1.0;
  double Jring = 1.0;        // sqrt(det Bring)
  Mat<D> Ftilde_inv;         // cached closed-form inverse
};

/// Composite measures describing the total deformation from the stress-free
/// to the equilibrium configuration without ever forming the pre-deformation
/// gradient: B = Fbar Ftilde^-1 Bring Ftilde^-T Fbar^T, J = Jbar Jtilde^-1 Jring,
/// and the recurring right factor A = Fbar Ftilde^-1 Bring Ftilde^-T.
template <int D>
struct CompositeKinematics {
  Mat<D> B;
  Mat<D> A;
  double J = 1.0;
};

/// Builds the deformation state from field gradients. Throws InvertedElement
/// when either determinant is non-positive (a Newton trial step went too far)
/// and NonSPDPredeformation when Bring is not symmetric positive definite.
template <int D>
DeformationState<D> deformation_state(const Mat<D>& grad_r, const Mat<D>& grad_u,
                                      const Mat<D>& Bring, const Vec<D>& grad_theta) {
  DeformationState<D> ds;
  ds.Ftilde = Mat<D>::Identity() + grad_r;
  ds.Fbar = Mat<D>::Identity() + grad_u;
  ds.Jtilde = ds.Ftilde.determinant();
  ds.Jbar = ds.Fbar.determinant();
  if (!(ds.Jtilde > 0.0))
    throw InvertedElement("initial-configuration map inverted (det = " + std::to_string(ds.Jtilde) + ")");
  if (!(ds.Jbar > 0.0))
    throw InvertedElement("equilibrium-configuration map inverted (det = " + std::to_string(ds.Jbar) + ")");
  if (!is_spd<D>(Bring)) throw NonSPDPredeformation("pre-deformation tensor is not SPD");
  ds.Bring = Bring;
  ds.grad_theta = grad_theta;
  ds.Jring = std::sqrt(Bring.determinant());
  ds.Ftilde_inv = ds.Ftilde.inverse();
  return ds;
}

template <int D>
CompositeKinematics<D> composite(const DeformationState<D>& ds) {
  CompositeKinematics<D> ck;
  const Mat<D> G = ds.Fbar * ds.Ftilde_inv;  // Fbar Ftilde^-1
  ck.A = G * ds.Bring * ds.Ftilde_inv.transpose();
  ck.B = sym<D>(ck.A * ds.Fbar.transpose());
  ck.J = ds.Jbar * ds.Jring / ds.Jtilde;
  return ck;
}

}  // namespace inveldes
