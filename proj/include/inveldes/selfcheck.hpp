#pragma once

#include <iosfwd>
#include <random>

#include "inveldes/oracles.hpp"

namespace inveldes {

/// Random admissible evaluation point: moderate displacement gradients with
/// positive determinants and a well-conditioned SPD pre-deformation.
template <int D>
struct RandomState {
  Mat<D> grad_r, grad_u, bring;
  double theta, theta0;
};

template <int D>
RandomState<D> random_state(std::mt19937& rng, double gradient_range = 0.3) {
  std::uniform_real_distribution<double> g(-gradient_range, gradient_range);
  std::uniform_real_distribution<double> t(-2.0, 2.0);
  RandomState<D> s;
  for (;;) {
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) {
        s.grad_r(i, j) = g(rng);
        s.grad_u(i, j) = g(rng);
      }
    if ((Mat<D>::Identity() + s.grad_r).determinant() > 0.2 &&
        (Mat<D>::Identity() + s.grad_u).determinant() > 0.2)
      break;
  }
  Mat<D> m;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) m(i, j) = g(rng);
  s.bring = m * m.transpose() + 0.5 * Mat<D>::Identity();
  s.theta = t(rng);
  s.theta0 = t(rng);
  return s;
}

struct SelfCheckResult {
  int passed = 0;
  int failed = 0;
  bool ok() const { return failed == 0; }
};

/// Constitutive oracle suite: compares both stress laws against the
/// factorized-composition reference path on random states (2D and 3D),
/// including the classical-law reduction and Cauchy symmetry.
SelfCheckResult run_constitutive_checks(int samples, std::ostream& out);

/// Observed Taylor order of the assembled Jacobian on a tiny built-in mesh;
/// a consistent linearization gives ~2.
double jacobian_observed_order(std::ostream& out);

/// Full `check` subcommand body. Returns true when everything passed.
bool run_self_checks(std::ostream& out);

}  // namespace inveldes
