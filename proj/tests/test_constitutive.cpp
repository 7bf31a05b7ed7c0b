#include <random>

#include "doctest.h"
#include "inveldes/selfcheck.hpp"

using namespace inveldes;

namespace {

MaterialModel stvk_beam() {
  MaterialModel m;
  m.law = Law::StVenantKirchhoff;
  m.lambda = 2e6;
  m.mu = 0.5e6;
  return m;
}

template <int D>
DeformationState<D> identity_state() {
  return deformation_state<D>(Mat<D>::Zero(), Mat<D>::Zero(), Mat<D>::Identity(), Vec<D>::Zero());
}

}  // namespace

TEST_CASE("stress-free reference gives zero stress") {
  const auto ds = identity_state<2>();
  const auto ck = composite<2>(ds);
  MaterialModel m = stvk_beam();
  CHECK(stress_stvk<2>(ck, ds, 0.0, 0.0, m).P.norm() == doctest::Approx(0.0));
  MaterialModel nh;
  nh.law = Law::NeoHooke;
  nh.d1 = 1e5;
  nh.c1 = 4e4;
  CHECK(stress_neohooke<2>(ck, ds, 0.0, 0.0, nh).P.norm() == doctest::Approx(0.0));
}

TEST_CASE("thermal term alone at identity kinematics") {
  const auto ds2 = identity_state<2>();
  const auto ck2 = composite<2>(ds2);
  MaterialModel m = stvk_beam();
  m.alpha = 1.0;
  const Mat<2> p = stress_stvk<2>(ck2, ds2, 1.0, 0.0, m).P;
  CHECK((p + Mat<2>::Identity()).norm() < 1e-14);  // P = -I exactly

  MaterialModel nh;
  nh.law = Law::NeoHooke;
  nh.d1 = 1e5;
  nh.c1 = 4e4;
  nh.alpha = 0.5;
  const Mat<2> pn = stress_neohooke<2>(ck2, ds2, 2.0, 0.0, nh).P;
  CHECK((pn + Mat<2>::Identity()).norm() < 1e-14);

  const auto ds3 = identity_state<3>();
  const auto ck3 = composite<3>(ds3);
  CHECK((stress_stvk<3>(ck3, ds3, 1.0, 0.0, m).P + Mat<3>::Identity()).norm() < 1e-14);
}

TEST_CASE("uniaxial StVK matches the textbook Lagrangian stress") {
  Mat<2> gu = Mat<2>::Zero();
  gu(0, 0) = 0.1;  // Fbar = diag(1.1, 1)
  const auto ds = deformation_state<2>(Mat<2>::Zero(), gu, Mat<2>::Identity(), Vec<2>::Zero());
  const auto ck = composite<2>(ds);
  const MaterialModel m = stvk_beam();
  const Mat<2> p = stress_stvk<2>(ck, ds, 0.0, 0.0, m).P;
  const Mat<2> F = Mat<2>::Identity() + gu;
  const Mat<2> expected = oracles::textbook_stvk<2>(F, m.lambda, m.mu);
  CHECK((p - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("3D Neo-Hooke dilation matches the textbook form") {
  Mat<3> gu = 0.05 * Mat<3>::Identity();
  const auto ds = deformation_state<3>(Mat<3>::Zero(), gu, Mat<3>::Identity(), Vec<3>::Zero());
  const auto ck = composite<3>(ds);
  MaterialModel nh;
  nh.law = Law::NeoHooke;
  nh.d1 = 1e5;
  nh.c1 = 4e4;
  const Mat<3> p = stress_neohooke<3>(ck, ds, 0.0, 0.0, nh).P;
  const Mat<3> F = Mat<3>::Identity() + gu;
  const Mat<3> expected = oracles::textbook_neohooke<3>(F, nh.d1, nh.c1);
  CHECK((p - expected).norm() <= 1e-12 * std::max(expected.norm(), 1.0));
}

TEST_CASE("classical reduction on 500 random deformations, both laws") {
  std::mt19937 rng(3u);
  MaterialModel m = stvk_beam();
  MaterialModel nh;
  nh.law = Law::NeoHooke;
  nh.d1 = 1e5;
  nh.c1 = 4e4;
  for (int i = 0; i < 500; ++i) {
    const auto s = random_state<2>(rng);
    const auto ds = deformation_state<2>(Mat<2>::Zero(), s.grad_u, Mat<2>::Identity(),
                                         Vec<2>::Zero());
    const auto ck = composite<2>(ds);
    const Mat<2> F = Mat<2>::Identity() + s.grad_u;
    const Mat<2> p1 = stress_stvk<2>(ck, ds, 0.0, 0.0, m).P;
    const Mat<2> e1 = oracles::textbook_stvk<2>(F, m.lambda, m.mu);
    CHECK((p1 - e1).norm() <= 1e-9 * std::max(e1.norm(), 1.0));
    const Mat<2> p2 = stress_neohooke<2>(ck, ds, 0.0, 0.0, nh).P;
    const Mat<2> e2 = oracles::textbook_neohooke<2>(F, nh.d1, nh.c1);
    CHECK((p2 - e2).norm() <= 1e-9 * std::max(e2.norm(), 1.0));
  }
}

TEST_CASE("pullback identities against the factorized oracle on random states") {
  std::mt19937 rng(11u);
  MaterialModel m = stvk_beam();
  m.alpha = 1e3;
  MaterialModel nh;
  nh.law = Law::NeoHooke;
  nh.d1 = 1e5;
  nh.c1 = 4e4;
  nh.alpha = 1e3;
  for (int i = 0; i < 500; ++i) {
    const auto s = random_state<2>(rng);
    const auto ds = deformation_state<2>(s.grad_r, s.grad_u, s.bring, Vec<2>::Zero());
    const auto ck = composite<2>(ds);
    const Mat<2> p1 = stress_stvk<2>(ck, ds, s.theta, s.theta0, m).P;
    const Mat<2> e1 = oracles::pullback_stvk<2>(s.grad_r, s.grad_u, s.bring, s.theta, s.theta0, m);
    CHECK((p1 - e1).norm() <= 1e-9 * std::max(e1.norm(), 1.0));
    const Mat<2> p2 = stress_neohooke<2>(ck, ds, s.theta, s.theta0, nh).P;
    const Mat<2> e2 =
        oracles::pullback_neohooke<2>(s.grad_r, s.grad_u, s.bring, s.theta, s.theta0, nh);
    CHECK((p2 - e2).norm() <= 1e-9 * std::max(e2.norm(), 1.0));
  }
  // 3D spot checks of the same chains
  for (int i = 0; i < 100; ++i) {
    const auto s = random_state<3>(rng);
    const auto ds = deformation_state<3>(s.grad_r, s.grad_u, s.bring, Vec<3>::Zero());
    const auto ck = composite<3>(ds);
    const Mat<3> p1 = stress_stvk<3>(ck, ds, s.theta, s.theta0, m).P;
    const Mat<3> e1 = oracles::pullback_stvk<3>(s.grad_r, s.grad_u, s.bring, s.theta, s.theta0, m);
    CHECK((p1 - e1).norm() <= 1e-9 * std::max(e1.norm(), 1.0));
    const Mat<3> p2 = stress_neohooke<3>(ck, ds, s.theta, s.theta0, nh).P;
    const Mat<3> e2 =
        oracles::pullback_neohooke<3>(s.grad_r, s.grad_u, s.bring, s.theta, s.theta0, nh);
    CHECK((p2 - e2).norm() <= 1e-9 * std::max(e2.norm(), 1.0));
  }
}

TEST_CASE("Cauchy stress is symmetric for both laws") {
  std::mt19937 rng(5u);
  MaterialModel m = stvk_beam();
  m.alpha = 500.0;
  MaterialModel nh;
  nh.law = Law::NeoHooke;
  nh.d1 = 1e5;
  nh.c1 = 4e4;
  nh.alpha = 500.0;
  for (int i = 0; i < 200; ++i) {
    const auto s = random_state<2>(rng);
    const auto ds = deformation_state<2>(s.grad_r, s.grad_u, s.bring, Vec<2>::Zero());
    const auto ck = composite<2>(ds);
    for (const Mat<2>& c : {stress_stvk<2>(ck, ds, s.theta, s.theta0, m).cauchy,
                            stress_neohooke<2>(ck, ds, s.theta, s.theta0, nh).cauchy})
      CHECK((c - c.transpose()).norm() <= 1e-9 * std::max(c.norm(), 1.0));
  }
}

TEST_CASE("smoothing stress: examples and linearity") {
  MaterialModel m;
  m.lambda_phi = 1.0;
  m.mu_phi = 1.0;
  CHECK(smoothing_stress<2>(Mat<2>::Zero(), m).norm() == 0.0);

  const Mat<2> s4 = smoothing_stress<2>(Mat<2>::Identity(), m);
  CHECK((s4 - 4.0 * Mat<2>::Identity()).norm() < 1e-15);

  Mat<2> skew;
  skew << 0.0, 0.7, -0.7, 0.0;
  m.lambda_phi = 3.5;
  CHECK(smoothing_stress<2>(skew, m).norm() == 0.0);

  // exact linearity
  std::mt19937 rng(9u);
  std::uniform_real_distribution<double> g(-1.0, 1.0);
  Mat<2> g1, g2;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      g1(i, j) = g(rng);
      g2(i, j) = g(rng);
    }
  const double a = 0.5, b = -2.0;
  const Mat<2> lhs = smoothing_stress<2>(Mat<2>(a * g1 + b * g2), m);
  const Mat<2> rhs = a * smoothing_stress<2>(g1, m) + b * smoothing_stress<2>(g2, m);
  CHECK((lhs - rhs).norm() <= 1e-15 * (lhs.norm() + rhs.norm()));
}

TEST_CASE("heat flux examples") {
  MaterialModel m;
  m.kappa = 0.2;
  CHECK(heat_flux<2>(Vec<2>::Zero(), m).norm() == 0.0);
  Vec<2> g;
  g << 1.0, 0.0;
  CHECK(heat_flux<2>(g, m)[0] == doctest::Approx(-0.2));
  CHECK(heat_flux<2>(g, m)[1] == doctest::Approx(0.0));
  m.kappa = 0.41;
  g << 3.0, 4.0;
  const Vec<2> q = heat_flux<2>(g, m);
  CHECK(q[0] == doctest::Approx(-1.23));
  CHECK(q[1] == doctest::Approx(-1.64));
}

TEST_CASE("finite-difference stress tangent") {
  MaterialModel m = stvk_beam();
  m.alpha = 2.0;
  MaterialModel nh;
  nh.law = Law::NeoHooke;
  nh.d1 = 1e5;
  nh.c1 = 4e4;
  nh.alpha = 2.0;

  SUBCASE("thermal block at identity is -alpha I") {
    for (const MaterialModel& mat : {m, nh}) {
      const auto t = stress_tangent_fd<2>(mat, Mat<2>::Zero(), Mat<2>::Zero(), Mat<2>::Identity(),
                                          0.0, 0.0);
      CHECK((t.dP_dtheta + mat.alpha * Mat<2>::Identity()).norm() < 1e-8 * mat.alpha);
    }
  }

  SUBCASE("self-convergence order of the FD tangent is ~2") {
    std::mt19937 rng(13u);
    const auto s = random_state<2>(rng);
    auto tangent_norm_diff = [&](double h1, double h2) {
      const auto ta = stress_tangent_fd<2>(nh, s.grad_r, s.grad_u, s.bring, s.theta, s.theta0, h1);
      const auto tb = stress_tangent_fd<2>(nh, s.grad_r, s.grad_u, s.bring, s.theta, s.theta0, h2);
      double acc = 0.0;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          acc += (ta.dP_dgrad_u[k][l] - tb.dP_dgrad_u[k][l]).squaredNorm() +
                 (ta.dP_dgrad_r[k][l] - tb.dP_dgrad_r[k][l]).squaredNorm();
      return std::sqrt(acc);
    };
    const double e1 = tangent_norm_diff(2e-3, 1e-3);
    const double e2 = tangent_norm_diff(1e-3, 5e-4);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 1.9);
  }
}

TEST_CASE("built-in constitutive self check suite passes") {
  std::ostringstream sink;
  const SelfCheckResult res = run_constitutive_checks(100, sink);
  CHECK(res.failed == 0);
  CHECK(res.passed > 0);
}
