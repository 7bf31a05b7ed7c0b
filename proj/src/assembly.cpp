#include "inveldes/assembly.hpp"

#include <algorithm>

#include "inveldes/solver.hpp"

namespace inveldes {

InitialState InitialState::rest(const Mesh& mesh) {
  InitialState s;
  const int d = mesh.dim;
  s.bring.assign(static_cast<std::size_t>(mesh.num_elements()) * d * d, 0.0);
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int c = 0; c < d; ++c) s.bring[static_cast<std::size_t>(e) * d * d + c * d + c] = 1.0;
  s.theta0 = Vector::Zero(mesh.num_nodes());
  return s;
}

DofMap::DofMap(const Mesh& mesh, Mode mode, const BoundaryTable& bc, const std::vector<Pin>& pins)
    : mesh_(&mesh), dim_(mesh.dim), mode_(mode) {
  const int nn = mesh.num_nodes();
  constrained_.assign(static_cast<std::size_t>(nn) * per_node(), 0);
  value_.assign(static_cast<std::size_t>(nn) * per_node(), 0.0);
  tag_has_u_.assign(mesh.tags.size(), 0);
  tag_has_theta_.assign(mesh.tags.size(), 0);

  for (const auto& [tag, tbc] : bc) {
    if (!mesh.has_tag(tag)) throw UnknownTag("boundary condition references unknown tag '" + tag + "'");
    const int ti = mesh.tag_index(tag);
    if (tbc.u) {
      if (tbc.u->size() != dim_) throw ConfigError("u value on tag '" + tag + "' has wrong size");
      tag_has_u_[ti] = 1;
    }
    if (tbc.r && tbc.r->size() != dim_)
      throw ConfigError("r value on tag '" + tag + "' has wrong size");
    if (tbc.theta) tag_has_theta_[ti] = 1;
  }

  // Mode invariants: forward prescribes r on the whole boundary, inverse
  // prescribes u (the initial shape is then free wherever no r value pins it).
  for (std::size_t ti = 0; ti < mesh.tags.size(); ++ti) {
    auto it = bc.find(mesh.tags[ti]);
    const bool has_r = it != bc.end() && it->second.r.has_value();
    const bool has_u = it != bc.end() && it->second.u.has_value();
    if (mode == Mode::Forward && !has_r)
      throw ConfigError("forward mode requires an r value on every boundary tag (missing '" +
                        mesh.tags[ti] + "')");
    if (mode == Mode::Inverse && !has_u)
      throw ConfigError("inverse mode requires a u value on every boundary tag (missing '" +
                        mesh.tags[ti] + "')");
  }

  for (const Facet& f : mesh_->facets) {
    auto it = bc.find(mesh.tags[f.tag]);
    if (it == bc.end()) continue;
    const TagBC& tbc = it->second;
    for (int k = 0; k < dim_; ++k) {
      const int node = f.nodes[k];
      if (tbc.u)
        for (int c = 0; c < dim_; ++c) {
          constrained_[u_dof(node, c)] = 1;
          value_[u_dof(node, c)] = (*tbc.u)[c];
        }
      if (tbc.r)
        for (int c = 0; c < dim_; ++c) {
          constrained_[r_dof(node, c)] = 1;
          value_[r_dof(node, c)] = (*tbc.r)[c];
        }
      if (tbc.theta) {
        constrained_[theta_dof(node)] = 1;
        value_[theta_dof(node)] = *tbc.theta;
      }
    }
  }

  for (const Pin& p : pins) {
    if (p.at.size() != dim_) throw ConfigError("pin coordinates have wrong dimension");
    int best = 0;
    double best_d2 = 1e300;
    for (int i = 0; i < nn; ++i) {
      double d2 = 0.0;
      for (int c = 0; c < dim_; ++c) {
        const double dd = mesh.coords[static_cast<std::size_t>(i) * dim_ + c] - p.at[c];
        d2 += dd * dd;
      }
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    for (int c : p.comps) {
      if (c < 0 || c >= dim_) throw ConfigError("pin component out of range");
      const int dof = p.field == Pin::Field::U ? u_dof(best, c) : r_dof(best, c);
      constrained_[dof] = 1;
      value_[dof] = p.value;
    }
  }
}

void DofMap::set_prescribed(int dof, double v) {
  if (!constrained_[dof]) throw ConfigError("cannot override a value on an unconstrained dof");
  value_[dof] = v;
}

int DofMap::momentum_row(int node, int c) const {
  if (!constrained_[u_dof(node, c)]) return u_dof(node, c);
  if (mode_ == Mode::Inverse && mesh_->is_boundary_node(node) && !constrained_[r_dof(node, c)])
    return r_dof(node, c);
  return -1;
}

int DofMap::smoothing_row(int node, int c) const {
  if (!constrained_[r_dof(node, c)] && !mesh_->is_boundary_node(node)) return r_dof(node, c);
  return -1;
}

int DofMap::heat_row(int node) const {
  return constrained_[theta_dof(node)] ? -1 : theta_dof(node);
}

void DofMap::apply_dirichlet(Vector& x, double scale) const {
  for (int i = 0; i < n_dofs(); ++i)
    if (constrained_[i]) x[i] = scale * value_[i];
}

bool DofMap::momentum_neumann_facet(const Facet& f) const {
  if (mode_ == Mode::Inverse) return true;  // traction integral over the full boundary
  return !tag_has_u_[f.tag];
}

bool DofMap::heat_neumann_facet(const Facet& f) const { return !tag_has_theta_[f.tag]; }

SystemAssembler::SystemAssembler(const Mesh& mesh, const DofMap& dofs,
                                 const MaterialModel& material, const LoadSpec& loads,
                                 const BoundaryTable& bc, const InitialState& init)
    : mesh_(&mesh), dofs_(&dofs), material_(material), loads_(loads), init_(init) {
  material_.validate();
  if (loads_.body_force.size() != mesh.dim) throw ConfigError("body force has wrong dimension");
  if (static_cast<int>(init.theta0.size()) != mesh.num_nodes())
    throw ConfigError("theta0 field size does not match the mesh");
  if (init.bring.size() != static_cast<std::size_t>(mesh.num_elements()) * mesh.dim * mesh.dim)
    throw ConfigError("pre-deformation array size does not match the mesh");

  facet_traction_.assign(mesh.num_facets(), Eigen::VectorXd::Zero(mesh.dim));
  facet_heat_flux_.assign(mesh.num_facets(), 0.0);
  for (int i = 0; i < mesh.num_facets(); ++i) {
    auto it = bc.find(mesh.tags[mesh.facets[i].tag]);
    if (it == bc.end()) continue;
    if (it->second.traction) {
      if (it->second.traction->size() != mesh.dim)
        throw ConfigError("traction on tag '" + it->first + "' has wrong size");
      facet_traction_[i] = *it->second.traction;
    }
    facet_heat_flux_[i] = it->second.heat_flux;
  }
}

namespace {

// Local dof layout per element: for each node (u_0..u_{d-1}, r_0..r_{d-1}, theta).
template <int D>
struct ElementScratch {
  static constexpr int kNodes = D + 1;
  static constexpr int kPerNode = 2 * D + 1;
  static constexpr int kLoc = kNodes * kPerNode;

  std::array<int, kNodes> nodes;
  std::array<Vec<D>, kNodes> grads;
  double volume = 0.0;
  Mat<D> bring;
  double theta0_centroid = 0.0;
};

template <int D>
void local_residual(const ElementScratch<D>& es, const MaterialModel& m,
                    const Eigen::VectorXd& body_force, double heat_source, double load_scale,
                    const double* xloc, double* rloc) {
  Mat<D> grad_u = Mat<D>::Zero(), grad_r = Mat<D>::Zero();
  Vec<D> grad_theta = Vec<D>::Zero();
  double theta_c = 0.0;
  for (int a = 0; a < ElementScratch<D>::kNodes; ++a) {
    const double* na = xloc + a * ElementScratch<D>::kPerNode;
    for (int i = 0; i < D; ++i) {
      grad_u.row(i) += na[i] * es.grads[a].transpose();
      grad_r.row(i) += na[D + i] * es.grads[a].transpose();
    }
    grad_theta += na[2 * D] * es.grads[a];
    theta_c += na[2 * D];
  }
  theta_c /= ElementScratch<D>::kNodes;

  const auto ds = deformation_state<D>(grad_r, grad_u, es.bring, grad_theta);
  const auto ck = composite<D>(ds);
  MaterialModel ms = m;
  ms.alpha *= load_scale;
  const Mat<D> P = (m.law == Law::StVenantKirchhoff)
                       ? stress_stvk<D>(ck, ds, theta_c, es.theta0_centroid, ms).P
                       : stress_neohooke<D>(ck, ds, theta_c, es.theta0_centroid, ms).P;
  const Mat<D> sphi = smoothing_stress<D>(grad_r, m);
  const Vec<D> q = heat_flux<D>(grad_theta, m);

  const double lump = es.volume / ElementScratch<D>::kNodes;
  for (int a = 0; a < ElementScratch<D>::kNodes; ++a) {
    double* ra = rloc + a * ElementScratch<D>::kPerNode;
    const Vec<D> Pg = P * es.grads[a];
    const Vec<D> sg = sphi * es.grads[a];
    for (int i = 0; i < D; ++i) {
      ra[i] = es.volume * Pg[i] - load_scale * lump * ds.Jbar * body_force[i];
      ra[D + i] = es.volume * sg[i];
    }
    ra[2 * D] = es.volume * q.dot(es.grads[a]) - load_scale * lump * ds.Jbar * heat_source;
  }
}

// Facet Neumann terms depend on u of the owning element through the Nanson
// factor; one-point quadrature distributes area/d to each facet node.
template <int D>
void facet_residual(const Facet& f, const ElementScratch<D>& es, const Eigen::VectorXd& traction,
                    double heat_flux_value, double load_scale, const double* xloc, double* rloc,
                    bool do_momentum, bool do_heat) {
  Mat<D> grad_u = Mat<D>::Zero();
  for (int a = 0; a < ElementScratch<D>::kNodes; ++a) {
    const double* na = xloc + a * ElementScratch<D>::kPerNode;
    for (int i = 0; i < D; ++i) grad_u.row(i) += na[i] * es.grads[a].transpose();
  }
  const Mat<D> Fbar = Mat<D>::Identity() + grad_u;
  Vec<D> n;
  for (int c = 0; c < D; ++c) n[c] = f.normal[c];
  const double metric = surface_metric<D>(Fbar, n);
  const double w = load_scale * f.area / D * metric;

  std::fill(rloc, rloc + ElementScratch<D>::kLoc, 0.0);
  for (int k = 0; k < D; ++k) {
    int a = -1;
    for (int j = 0; j < ElementScratch<D>::kNodes; ++j)
      if (es.nodes[j] == f.nodes[k]) a = j;
    double* ra = rloc + a * ElementScratch<D>::kPerNode;
    if (do_momentum)
      for (int i = 0; i < D; ++i) ra[i] -= w * traction[i];
    if (do_heat) ra[2 * D] -= w * heat_flux_value;
  }
}

template <int D>
ElementScratch<D> make_scratch(const Mesh& mesh, const InitialState& init, int e) {
  ElementScratch<D> es;
  const int* n = mesh.element(e);
  const ElementGeometry& g = mesh.geometry(e);
  es.volume = g.volume;
  es.bring = init.bring_at<D>(e);
  es.theta0_centroid = 0.0;
  for (int a = 0; a <= D; ++a) {
    es.nodes[a] = n[a];
    es.grads[a] = g.grads[a];
    es.theta0_centroid += init.theta0[n[a]];
  }
  es.theta0_centroid /= (D + 1);
  return es;
}

template <int D>
void gather(const DofMap& dofs, const Vector& x, const ElementScratch<D>& es, double* xloc) {
  for (int a = 0; a < ElementScratch<D>::kNodes; ++a) {
    const int base = es.nodes[a] * dofs.per_node();
    for (int k = 0; k < ElementScratch<D>::kPerNode; ++k)
      xloc[a * ElementScratch<D>::kPerNode + k] = x[base + k];
  }
}

// Global row index for local residual slot (a, k); -1 drops the entry.
template <int D>
int route_row(const DofMap& dofs, const ElementScratch<D>& es, int a, int k) {
  const int node = es.nodes[a];
  if (k < D) return dofs.momentum_row(node, k);
  if (k < 2 * D) return dofs.smoothing_row(node, k - D);
  return dofs.heat_row(node);
}

// Facet rows reuse the momentum/heat routing (in inverse mode the boundary
// momentum rows live in the r slots).
template <int D>
int route_facet_row(const DofMap& dofs, const ElementScratch<D>& es, int a, int k) {
  const int node = es.nodes[a];
  if (k < D) return dofs.momentum_row(node, k);
  if (k < 2 * D) return -1;
  return dofs.heat_row(node);
}

}  // namespace

template <int D>
void SystemAssembler::residual_impl(const Vector& x, Vector& r) const {
  constexpr int kLoc = ElementScratch<D>::kLoc;
  double xloc[kLoc], rloc[kLoc];

  for (int e = 0; e < mesh_->num_elements(); ++e) {
    const auto es = make_scratch<D>(*mesh_, init_, e);
    gather<D>(*dofs_, x, es, xloc);
    local_residual<D>(es, material_, loads_.body_force, loads_.heat_source, load_scale_, xloc,
                      rloc);
    for (int a = 0; a < ElementScratch<D>::kNodes; ++a)
      for (int k = 0; k < ElementScratch<D>::kPerNode; ++k) {
        const int row = route_row<D>(*dofs_, es, a, k);
        if (row >= 0) r[row] += rloc[a * ElementScratch<D>::kPerNode + k];
      }
  }

  for (int fi = 0; fi < mesh_->num_facets(); ++fi) {
    const Facet& f = mesh_->facets[fi];
    const bool do_m = dofs_->momentum_neumann_facet(f);
    const bool do_h = dofs_->heat_neumann_facet(f);
    if (!do_m && !do_h) continue;
    const auto es = make_scratch<D>(*mesh_, init_, f.element);
    gather<D>(*dofs_, x, es, xloc);
    facet_residual<D>(f, es, facet_traction_[fi], facet_heat_flux_[fi], load_scale_, xloc, rloc,
                      do_m, do_h);
    for (int a = 0; a < ElementScratch<D>::kNodes; ++a)
      for (int k = 0; k < ElementScratch<D>::kPerNode; ++k) {
        const int row = route_facet_row<D>(*dofs_, es, a, k);
        if (row >= 0) r[row] += rloc[a * ElementScratch<D>::kPerNode + k];
      }
  }

  for (int dof = 0; dof < dofs_->n_dofs(); ++dof)
    if (dofs_->constrained(dof)) r[dof] = x[dof] - dofs_->prescribed(dof);
}

Vector SystemAssembler::residual(const Vector& x) const {
  if (x.size() != dofs_->n_dofs()) throw ConfigError("state vector has wrong size");
  Vector r = Vector::Zero(dofs_->n_dofs());
  if (mesh_->dim == 2)
    residual_impl<2>(x, r);
  else
    residual_impl<3>(x, r);
  return r;
}

namespace {

// Central-difference column of a local residual function; halves the step on
// InvertedElement up to 3 times.
template <int D, class F>
void fd_columns(F&& local_fn, double* xloc, int nloc,
                std::array<double, ElementScratch<D>::kLoc>& plus,
                std::array<double, ElementScratch<D>::kLoc>& minus,
                std::array<std::array<double, ElementScratch<D>::kLoc>,
                           ElementScratch<D>::kLoc>& cols) {
  for (int j = 0; j < nloc; ++j) {
    double h = 1e-6 * std::max(1.0, std::abs(xloc[j]));
    const double saved = xloc[j];
    for (int attempt = 0;; ++attempt) {
      try {
        xloc[j] = saved + h;
        local_fn(xloc, plus.data());
        xloc[j] = saved - h;
        local_fn(xloc, minus.data());
        xloc[j] = saved;
        break;
      } catch (const InvertedElement&) {
        xloc[j] = saved;
        if (attempt >= 3) throw;
        h *= 0.5;
      }
    }
    for (int i = 0; i < nloc; ++i) cols[j][i] = (plus[i] - minus[i]) / (2.0 * h);
  }
}

}  // namespace

template <int D>
void SystemAssembler::jacobian_impl(const Vector& x,
                                    std::vector<Eigen::Triplet<double>>& trips) const {
  constexpr int kLoc = ElementScratch<D>::kLoc;
  double xloc[kLoc];
  std::array<double, kLoc> plus{}, minus{};
  std::array<std::array<double, kLoc>, kLoc> cols{};

  for (int e = 0; e < mesh_->num_elements(); ++e) {
    const auto es = make_scratch<D>(*mesh_, init_, e);
    gather<D>(*dofs_, x, es, xloc);
    auto fn = [&](const double* xl, double* rl) {
      local_residual<D>(es, material_, loads_.body_force, loads_.heat_source, load_scale_, xl, rl);
    };
    fd_columns<D>(fn, xloc, kLoc, plus, minus, cols);
    for (int a = 0; a < ElementScratch<D>::kNodes; ++a)
      for (int k = 0; k < ElementScratch<D>::kPerNode; ++k) {
        const int row = route_row<D>(*dofs_, es, a, k);
        if (row < 0) continue;
        const int i = a * ElementScratch<D>::kPerNode + k;
        for (int b = 0; b < ElementScratch<D>::kNodes; ++b) {
          const int base = es.nodes[b] * dofs_->per_node();
          for (int l = 0; l < ElementScratch<D>::kPerNode; ++l) {
            const double v = cols[b * ElementScratch<D>::kPerNode + l][i];
            if (v != 0.0) trips.emplace_back(row, base + l, v);
          }
        }
      }
  }

  for (int fi = 0; fi < mesh_->num_facets(); ++fi) {
    const Facet& f = mesh_->facets[fi];
    const bool do_m = dofs_->momentum_neumann_facet(f);
    const bool do_h = dofs_->heat_neumann_facet(f);
    if (!do_m && !do_h) continue;
    const auto es = make_scratch<D>(*mesh_, init_, f.element);
    gather<D>(*dofs_, x, es, xloc);
    auto fn = [&](const double* xl, double* rl) {
      facet_residual<D>(f, es, facet_traction_[fi], facet_heat_flux_[fi], load_scale_, xl, rl,
                        do_m, do_h);
    };
    fd_columns<D>(fn, xloc, kLoc, plus, minus, cols);
    for (int a = 0; a < ElementScratch<D>::kNodes; ++a)
      for (int k = 0; k < ElementScratch<D>::kPerNode; ++k) {
        const int row = route_facet_row<D>(*dofs_, es, a, k);
        if (row < 0) continue;
        const int i = a * ElementScratch<D>::kPerNode + k;
        for (int b = 0; b < ElementScratch<D>::kNodes; ++b) {
          const int base = es.nodes[b] * dofs_->per_node();
          for (int l = 0; l < ElementScratch<D>::kPerNode; ++l) {
            const double v = cols[b * ElementScratch<D>::kPerNode + l][i];
            if (v != 0.0) trips.emplace_back(row, base + l, v);
          }
        }
      }
  }

  for (int dof = 0; dof < dofs_->n_dofs(); ++dof)
    if (dofs_->constrained(dof)) trips.emplace_back(dof, dof, 1.0);
}

Eigen::SparseMatrix<double> SystemAssembler::jacobian(const Vector& x) const {
  if (x.size() != dofs_->n_dofs()) throw ConfigError("state vector has wrong size");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh_->num_elements()) * 240);
  if (mesh_->dim == 2)
    jacobian_impl<2>(x, trips);
  else
    jacobian_impl<3>(x, trips);
  Eigen::SparseMatrix<double> J(dofs_->n_dofs(), dofs_->n_dofs());
  J.setFromTriplets(trips.begin(), trips.end());
  return J;
}

template <int D>
void SystemAssembler::stress_impl(const Vector& x, std::vector<double>& cauchy,
                                  Vector& snorm) const {
  constexpr int kLoc = ElementScratch<D>::kLoc;
  double xloc[kLoc];
  for (int e = 0; e < mesh_->num_elements(); ++e) {
    const auto es = make_scratch<D>(*mesh_, init_, e);
    gather<D>(*dofs_, x, es, xloc);
    Mat<D> grad_u = Mat<D>::Zero(), grad_r = Mat<D>::Zero();
    double theta_c = 0.0;
    for (int a = 0; a < ElementScratch<D>::kNodes; ++a) {
      const double* na = xloc + a * ElementScratch<D>::kPerNode;
      for (int i = 0; i < D; ++i) {
        grad_u.row(i) += na[i] * es.grads[a].transpose();
        grad_r.row(i) += na[D + i] * es.grads[a].transpose();
      }
      theta_c += na[2 * D];
    }
    theta_c /= ElementScratch<D>::kNodes;
    const auto ds = deformation_state<D>(grad_r, grad_u, es.bring, Vec<D>::Zero());
    const auto ck = composite<D>(ds);
    MaterialModel ms = material_;
    ms.alpha *= load_scale_;
    const StressResult<D> s = (material_.law == Law::StVenantKirchhoff)
                                  ? stress_stvk<D>(ck, ds, theta_c, es.theta0_centroid, ms)
                                  : stress_neohooke<D>(ck, ds, theta_c, es.theta0_centroid, ms);
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        cauchy[static_cast<std::size_t>(e) * D * D + i * D + j] = s.cauchy(i, j);
    snorm[e] = spectral_norm<D>(s.cauchy);
  }
}

void SystemAssembler::element_stress(const Vector& x, std::vector<double>& cauchy_out,
                                     Vector& snorm_out) const {
  const int d = mesh_->dim;
  cauchy_out.assign(static_cast<std::size_t>(mesh_->num_elements()) * d * d, 0.0);
  snorm_out = Vector::Zero(mesh_->num_elements());
  if (d == 2)
    stress_impl<2>(x, cauchy_out, snorm_out);
  else
    stress_impl<3>(x, cauchy_out, snorm_out);
}

namespace {

template <int D>
void extension_system(const Mesh& mesh, const MaterialModel& material,
                      const std::map<int, Eigen::VectorXd>& bvals,
                      std::vector<Eigen::Triplet<double>>& trips, Vector& rhs) {
  const int nn = mesh.num_nodes();
  std::vector<char> fixed(static_cast<std::size_t>(nn) * D, 0);
  Vector val = Vector::Zero(static_cast<std::size_t>(nn) * D);
  for (const auto& [node, v] : bvals) {
    if (node < 0 || node >= nn) throw ConfigError("extension boundary node out of range");
    for (int c = 0; c < D; ++c) {
      fixed[static_cast<std::size_t>(node) * D + c] = 1;
      val[static_cast<std::size_t>(node) * D + c] = v[c];
    }
  }
  // sigma_phi(grad w) : grad v, assembled exactly (the law is linear)
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const int* n = mesh.element(e);
    const ElementGeometry& g = mesh.geometry(e);
    for (int a = 0; a <= D; ++a)
      for (int b = 0; b <= D; ++b) {
        const Vec<D> ga = g.grads[a], gb = g.grads[b];
        for (int i = 0; i < D; ++i)
          for (int j = 0; j < D; ++j) {
            // d sigma_phi(grad w)_ik / d w_b[j] contracted with grad of test a
            double v = material.lambda_phi * gb[j] * ga[i] + material.mu_phi * gb[i] * ga[j];
            if (i == j) v += material.mu_phi * ga.dot(gb);
            v *= g.volume;
            const int row = n[a] * D + i, col = n[b] * D + j;
            if (fixed[row]) continue;
            if (fixed[col])
              rhs[row] -= v * val[col];
            else
              trips.emplace_back(row, col, v);
          }
      }
  }
  for (int i = 0; i < nn * D; ++i)
    if (fixed[i]) {
      trips.emplace_back(i, i, 1.0);
      rhs[i] = val[i];
    }
}

}  // namespace

Vector elastic_extension(const Mesh& mesh, const MaterialModel& material,
                         const std::map<int, Eigen::VectorXd>& boundary_values) {
  const int n = mesh.num_nodes() * mesh.dim;
  std::vector<Eigen::Triplet<double>> trips;
  Vector rhs = Vector::Zero(n);
  if (mesh.dim == 2)
    extension_system<2>(mesh, material, boundary_values, trips, rhs);
  else
    extension_system<3>(mesh, material, boundary_values, trips, rhs);
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  return linear_solve(A, rhs);
}

}  // namespace inveldes
