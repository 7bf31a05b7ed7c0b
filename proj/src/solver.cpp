#include "inveldes/solver.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

namespace inveldes {

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

Vector linear_solve(const Eigen::SparseMatrix<double>& A, const Vector& b) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw LinearSolveFailure("linear system has inconsistent dimensions");
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw LinearSolveFailure("sparse LU factorization failed (singular system?)");

  Vector x = lu.solve(b);
  if (!x.allFinite()) throw LinearSolveFailure("factorization produced non-finite values");
  // iterative refinement towards ||Ax-b|| <= 1e-8 ||b||; on ill-conditioned
  // systems that bound may sit below what double precision can represent, in
  // which case a machine-level normwise backward error is accepted instead
  double resid = 0.0;
  for (int sweep = 0; sweep < 4; ++sweep) {
    const Vector r = b - A * x;
    resid = r.norm();
    if (resid <= 1e-8 * b.norm() || resid == 0.0) return x;
    const Vector dx = lu.solve(r);
    if (!dx.allFinite()) break;
    x += dx;
  }
  resid = (A * x - b).norm();
  if (resid <= 1e-8 * b.norm()) return x;
  double norm_a = 0.0;  // 1-norm via column sums
  for (int c = 0; c < A.outerSize(); ++c) {
    double s = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) s += std::abs(it.value());
    norm_a = std::max(norm_a, s);
  }
  const double backward = resid / std::max(norm_a * x.norm() + b.norm(), 1e-300);
  if (backward <= 1e-13) return x;
  throw LinearSolveFailure("linear solve residual " + fmt_g(resid) + " (rhs norm " +
                           fmt_g(b.norm()) + ", backward error " + fmt_g(backward) +
                           ") exceeds tolerance");
}

SolveReport newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vector& x,
                         const SolverConfig& config) {
  config.validate();
  SolveReport rep;

  Vector r = residual(x);
  double norm = r.norm();
  rep.residual_history.push_back(norm);
  const double tol = std::max(config.abs_tol, config.rel_tol * norm);
  if (norm <= tol) {
    rep.converged = true;
    return rep;
  }

  int growth_streak = 0;
  for (int it = 1; it <= config.max_iters; ++it) {
    const Eigen::SparseMatrix<double> J = jacobian(x);
    const Vector dx = linear_solve(J, -r);

    // Scan t = 1, f, f^2, ... and take the first step satisfying the decrease
    // condition. The residual of a Newton step may grow steeply before the
    // quadratic phase (rotation-dominated elastic states do this), so when no
    // trial decreases the norm, the largest-t admissible trial is accepted
    // instead of stalling on tiny damped steps; a streak counter guards
    // against genuine divergence.
    double t = 1.0;
    bool accepted = false;
    Vector fallback_x, fallback_r;
    double fallback_norm = std::numeric_limits<double>::infinity();
    bool have_fallback = false;
    const int trials = config.damping == SolverConfig::Damping::None ? 1 : config.max_backtracks + 1;
    for (int bt = 0; bt < trials; ++bt) {
      const Vector xt = x + t * dx;
      try {
        const Vector rt = residual(xt);
        const double nt = rt.norm();
        if (nt <= (1.0 - 1e-4 * t) * norm || config.damping == SolverConfig::Damping::None) {
          x = xt;
          r = rt;
          norm = nt;
          accepted = true;
          growth_streak = 0;
          break;
        }
        if (!have_fallback) {  // keep the largest admissible step
          have_fallback = true;
          fallback_norm = nt;
          fallback_x = xt;
          fallback_r = rt;
        }
      } catch (const InvertedElement&) {
        if (config.damping == SolverConfig::Damping::None) throw;
      }
      ++rep.step_rejections;
      t *= config.backtrack_factor;
    }
    if (!accepted) {
      if (!have_fallback) {
        rep.iterations = it;
        throw NoConvergence("all backtracking trials left the admissible region", rep);
      }
      if (++growth_streak > 4) {
        rep.iterations = it;
        throw NoConvergence("residual diverged over repeated non-decreasing steps", rep);
      }
      x = fallback_x;
      r = fallback_r;
      norm = fallback_norm;
    }

    rep.iterations = it;
    rep.residual_history.push_back(norm);
    if (norm <= tol) {
      rep.converged = true;
      return rep;
    }
  }

  throw NoConvergence("Newton did not reach tolerance " + fmt_g(tol) + " in " +
                          std::to_string(config.max_iters) + " iterations (last residual " +
                          fmt_g(norm) + ")",
                      rep);
}

}  // namespace inveldes
