#pragma once

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "inveldes/tensor.hpp"

namespace inveldes {

struct SolverConfig {
  int max_iters = 50;
  double abs_tol = 1e-10;   // on the residual 2-norm
  double rel_tol = 1e-7;    // reduction vs the initial residual; the
                            // finite-difference tangent noise floor sits
                            // around 1e-9 relative (growing slowly with size), so tighter values stall
  enum class Damping { None, Backtracking };
  Damping damping = Damping::Backtracking;
  double backtrack_factor = 0.5;
  int max_backtracks = 8;

  void validate() const {
    if (!(abs_tol > 0.0)) throw ConfigError("solver: abs_tol must be positive");
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("solver: rel_tol must be in (0,1)");
    if (max_iters < 1) throw ConfigError("solver: max_iters must be >= 1");
  }
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;  // one 2-norm per iterate, starting state included
  int step_rejections = 0;
};

/// Newton did not reach the tolerance; carries the diagnostics collected so far.
class NoConvergence : public Error {
public:
  NoConvergence(const std::string& what, SolveReport rep)
      : Error(what), report(std::move(rep)) {}
  SolveReport report;
};

/// Direct sparse solve (LU). Enforces the backward-error check
/// ||Ax - b|| <= 1e-8 ||b|| and throws LinearSolveFailure otherwise, which
/// usually signals missing constraints (unpinned rigid or translation modes).
Vector linear_solve(const Eigen::SparseMatrix<double>& A, const Vector& b);

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Eigen::SparseMatrix<double>(const Vector&)>;

/// Damped Newton iteration on residual(x) = 0. The initial guess must respect
/// Dirichlet values (their rows are residual = current - prescribed, so they
/// are solved exactly in the first step regardless). Trial steps raising
/// InvertedElement are backtracked and counted as rejections; a step is never
/// accepted in an inverted state.
SolveReport newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vector& x,
                         const SolverConfig& config);

}  // namespace inveldes
