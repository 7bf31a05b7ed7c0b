#pragma once

#include "inveldes/assembly.hpp"
#include "inveldes/solver.hpp"

namespace inveldes {

/// Complete description of one forward or inverse solve.
struct ProblemSpec {
  Mode mode = Mode::Forward;
  const Mesh* mesh = nullptr;
  MaterialModel material;
  LoadSpec loads;
  BoundaryTable bc;
  std::vector<Pin> pins;
  InitialState initial_state;
  SolverConfig solver;

  /// Per-node Dirichlet values overriding the per-tag constants, used when a
  /// full boundary field is prescribed (round trips, outer iteration).
  std::map<int, Eigen::VectorXd> u_override;
  std::map<int, Eigen::VectorXd> r_override;

  /// Load continuation: 1 solves at full load directly; larger values ramp
  /// (fbar, hbar, gbar, kbar, alpha) uniformly. 0 = try direct, ramp on failure.
  int load_steps = 0;
};

/// Fields and diagnostics of a converged solve.
struct SolveResult {
  Vector x;       // monolithic dof vector
  Vector u;       // equilibrium displacement, dim per node
  Vector r;       // initial displacement, dim per node
  Vector theta;   // temperature per node
  SolveReport report;
  std::vector<double> cauchy;  // Cauchy stress, dim*dim per element
  Vector snorm;                // spectral norm of the Cauchy stress per element
  double boundary_traction_residual = 0.0;  // max |weak traction row| (inverse mode)
};

/// Forward driver: initial shape prescribed through r, equilibrium shape
/// solved for.
SolveResult run_forward(const ProblemSpec& spec);

/// Inverse driver: equilibrium shape prescribed through u on the whole
/// boundary (plus the traction condition), initial shape recovered from r.
SolveResult run_inverse(const ProblemSpec& spec);

/// Transient heat conduction producing an inhomogeneous reference temperature
/// field: backward Euler with P1 stiffness and lumped mass, Dirichlet
/// theta_boundary on every tagged facet node. With an acute/right-angled mesh
/// the iterates satisfy the discrete maximum principle.
struct HeatPresimParams {
  double kappa = 0.41;
  double theta_init = 0.0;
  double theta_boundary = -50.0;
  double dt = 0.01;
  int steps = 5;
};
Vector heat_presim(const Mesh& mesh, const HeatPresimParams& params,
                   const std::vector<double>* positions = nullptr);

/// Value-preserving transport of the auxiliary fields onto a new initial
/// shape: theta0 rides with its node, Bring with its element; only the
/// positions they are associated with move. Tangential boundary sliding is
/// not corrected.
InitialState transport_fields(const Mesh& mesh, const Vector& r_new, const InitialState& state);

/// Correction step contract: given the reference mesh and the current initial
/// displacement field (full, from a converged solve), produce updated
/// auxiliary fields. Must be deterministic and must not change mesh topology.
using CorrectionFn = std::function<InitialState(const Mesh&, const Vector& r)>;

struct IterationConfig {
  int max_outer = 10;
  double shape_tol = -1.0;  // < 0: defaults to 1e-4 * mesh diameter
  CorrectionFn correction;  // empty: fields are kept unchanged
  /// Boundary conditions and pins of the inner forward checks (the physical
  /// attachment constraints); r values are overridden per node by the loop.
  BoundaryTable forward_bc;
  std::vector<Pin> forward_pins;
};

struct IterationResult {
  bool converged = false;
  std::vector<double> mismatch_history;  // one entry per forward check
  Vector r;                              // final initial-shape displacement field
  InitialState state;                    // fields used in the last cycle
  SolveResult last_forward;              // fields of the last forward check
};

/// Outer iteration alternating field correction, forward check, and inverse
/// solve. Convergence is not guaranteed; a non-converged loop is reported in
/// the result, only failing inner solves raise NoConvergence.
IterationResult run_iteration(const ProblemSpec& inverse_spec, const IterationConfig& config);

/// Symmetric max over boundary nodes of the distance to the other boundary's
/// piecewise-linear interpolant; positions are x + displacement.
double shape_mismatch(const Mesh& mesh, const Vector& disp_a, const Vector& disp_b);

/// Index of the node closest to the given point.
int nearest_node(const Mesh& mesh, const Eigen::VectorXd& point);

}  // namespace inveldes
