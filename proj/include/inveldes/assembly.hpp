#pragma once

#include <map>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "inveldes/constitutive.hpp"
#include "inveldes/mesh.hpp"

namespace inveldes {

enum class Mode { Forward, Inverse };

/// Pre-deformation per element (stored as the symmetric tensor Bring) and
/// reference temperature per node.
struct InitialState {
  std::vector<double> bring;  // d*d entries per element, row-major
  Vector theta0;              // per node

  static InitialState rest(const Mesh& mesh);

  template <int D>
  Mat<D> bring_at(int e) const {
    using ConstMap = Eigen::Map<const Eigen::Matrix<double, D, D, Eigen::RowMajor>>;
    return ConstMap(bring.data() + static_cast<std::size_t>(e) * D * D);
  }
  template <int D>
  void set_bring(int e, const Mat<D>& b) {
    using MutMap = Eigen::Map<Eigen::Matrix<double, D, D, Eigen::RowMajor>>;
    MutMap(bring.data() + static_cast<std::size_t>(e) * D * D) = b;
  }
};

/// Per-tag boundary assignments. A tag without a Dirichlet value for a field
/// is a Neumann boundary for that field (traction / heat_flux, defaulting to
/// zero, act in the equilibrium configuration).
struct TagBC {
  std::optional<Eigen::VectorXd> u;      // prescribed equilibrium displacement
  std::optional<Eigen::VectorXd> r;      // prescribed initial displacement
  std::optional<double> theta;           // prescribed temperature
  std::optional<Eigen::VectorXd> traction;  // hbar
  double heat_flux = 0.0;                // kbar
};

using BoundaryTable = std::map<std::string, TagBC>;

/// Point constraint used to remove rigid-body or translation null modes for
/// otherwise unconstrained problems. Applies to the node nearest `at`.
struct Pin {
  enum class Field { U, R };
  Field field = Field::U;
  Eigen::VectorXd at;        // coordinates; resolved to the nearest node
  std::vector<int> comps;    // constrained components
  double value = 0.0;
};

/// Volume and surface loads (equilibrium-configuration densities).
struct LoadSpec {
  Eigen::VectorXd body_force;  // fbar, force/volume
  double heat_source = 0.0;    // gbar

  static LoadSpec none(int dim) {
    LoadSpec l;
    l.body_force = Eigen::VectorXd::Zero(dim);
    return l;
  }
};

/// Unknown numbering and constraint bookkeeping. Dofs are interleaved per
/// node as (u_0..u_{d-1}, r_0..r_{d-1}, theta); every dof owns exactly one
/// residual row. Dirichlet rows replace the physics row of their dof; in
/// inverse mode the momentum rows of boundary nodes are routed into the
/// r slots left open by the unconstrained smoothing equation.
class DofMap {
public:
  DofMap(const Mesh& mesh, Mode mode, const BoundaryTable& bc, const std::vector<Pin>& pins = {});

  int dim() const { return dim_; }
  Mode mode() const { return mode_; }
  int n_dofs() const { return static_cast<int>(value_.size()); }
  int per_node() const { return 2 * dim_ + 1; }

  int u_dof(int node, int c) const { return node * per_node() + c; }
  int r_dof(int node, int c) const { return node * per_node() + dim_ + c; }
  int theta_dof(int node) const { return node * per_node() + 2 * dim_; }

  bool constrained(int dof) const { return constrained_[dof] != 0; }
  double prescribed(int dof) const { return value_[dof]; }
  /// Replaces the prescribed value of an already-constrained dof (per-node
  /// Dirichlet data layered over the per-tag constants).
  void set_prescribed(int dof, double v);

  /// Row receiving the momentum weak-form equation of (node, comp); -1 if the
  /// equation is dropped (fully constrained corner).
  int momentum_row(int node, int c) const;
  /// Row receiving the smoothing equation (interior test functions only).
  int smoothing_row(int node, int c) const;
  int heat_row(int node) const;

  /// Overwrites constrained entries of x with their prescribed values,
  /// optionally scaled (load/displacement continuation).
  void apply_dirichlet(Vector& x, double scale = 1.0) const;

  /// Facets where the momentum traction term is integrated (Neumann part of
  /// the boundary in forward mode, the whole boundary in inverse mode).
  bool momentum_neumann_facet(const Facet& f) const;
  bool heat_neumann_facet(const Facet& f) const;

private:
  friend class SystemAssembler;
  const Mesh* mesh_;
  int dim_;
  Mode mode_;
  std::vector<char> constrained_;
  std::vector<double> value_;
  std::vector<char> tag_has_u_, tag_has_theta_;
};

/// Nanson area transformation factor Jbar |Fbar^-T n| converting
/// equilibrium-configuration surface loads to reference-configuration
/// integrals.
template <int D>
double surface_metric(const Mat<D>& Fbar, const Vec<D>& n) {
  double det = 0.0;
  const Mat<D> inv = inverse_checked<D>(Fbar, &det);
  return det * (inv.transpose() * n).norm();
}

/// Monolithic residual and Jacobian of the coupled momentum / smoothing /
/// heat system. The Jacobian is a consistent linearization obtained from
/// central finite differences of the per-element residual; element loops run
/// in a fixed order so serial assembly is bit-reproducible.
class SystemAssembler {
public:
  SystemAssembler(const Mesh& mesh, const DofMap& dofs, const MaterialModel& material,
                  const LoadSpec& loads, const BoundaryTable& bc, const InitialState& init);

  /// Uniform ramp factor applied to (fbar, hbar, gbar, kbar, alpha) for load
  /// stepping; 1 = full load.
  void set_load_scale(double s) { load_scale_ = s; }
  double load_scale() const { return load_scale_; }

  Vector residual(const Vector& x) const;
  Eigen::SparseMatrix<double> jacobian(const Vector& x) const;

  const DofMap& dofs() const { return *dofs_; }
  const Mesh& mesh() const { return *mesh_; }

  /// Per-element Cauchy stress and its spectral norm at the given state.
  void element_stress(const Vector& x, std::vector<double>& cauchy_out,
                      Vector& snorm_out) const;

private:
  template <int D>
  void residual_impl(const Vector& x, Vector& r) const;
  template <int D>
  void jacobian_impl(const Vector& x, std::vector<Eigen::Triplet<double>>& trips) const;
  template <int D>
  void stress_impl(const Vector& x, std::vector<double>& cauchy, Vector& snorm) const;

  const Mesh* mesh_;
  const DofMap* dofs_;
  MaterialModel material_;
  LoadSpec loads_;
  InitialState init_;
  double load_scale_ = 1.0;
  std::vector<Eigen::VectorXd> facet_traction_;  // per facet, resolved from tags
  std::vector<double> facet_heat_flux_;
};

/// Linear-elastic extension of prescribed boundary values into the interior
/// (one solve of the smoothing operator). Used for Dirichlet-consistent
/// initial guesses and as the standalone smoothing patch-test path.
/// `boundary_values` maps node -> value per component; interior nodes are
/// solved for. Returns the nodal vector field (dim entries per node).
Vector elastic_extension(const Mesh& mesh, const MaterialModel& material,
                         const std::map<int, Eigen::VectorXd>& boundary_values);

}  // namespace inveldes
