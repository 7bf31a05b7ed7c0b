#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "inveldes/tensor.hpp"

namespace inveldes {

/// Per-element geometry of an affine simplex: constant P1 shape-function
/// gradients and the element measure.
struct ElementGeometry {
  std::vector<Eigen::VectorXd> grads;  // d+1 gradients, each of length d
  double volume = 0.0;
};

/// Boundary facet (edge in 2D, triangle in 3D) with its tag and owning element.
struct Facet {
  int tag = -1;                          // index into Mesh::tags
  std::array<int, 3> nodes{-1, -1, -1};  // first d entries used
  int element = -1;             // unique owning element
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();  // outward unit normal (first d entries)
  double area = 0.0;
};

/// Simplex mesh of the reference configuration with tagged boundary facets.
///
/// Immutable after construction / load; all geometric quantities are
/// precomputed so concurrent reads are safe.
class Mesh {
public:
  int dim = 2;
  std::vector<double> coords;     // node-major, dim entries per node
  std::vector<int> elem_nodes;    // (dim+1) entries per element
  std::vector<Facet> facets;
  std::vector<std::string> tags;

  int num_nodes() const { return static_cast<int>(coords.size()) / dim; }
  int num_elements() const { return static_cast<int>(elem_nodes.size()) / (dim + 1); }
  int num_facets() const { return static_cast<int>(facets.size()); }

  const int* element(int e) const { return &elem_nodes[static_cast<std::size_t>(e) * (dim + 1)]; }
  Eigen::Map<const Eigen::VectorXd> node(int i) const {
    return {&coords[static_cast<std::size_t>(i) * dim], dim};
  }

  const ElementGeometry& geometry(int e) const { return geometry_[e]; }

  int tag_index(const std::string& tag) const;  // throws UnknownTag
  bool has_tag(const std::string& tag) const;

  /// Union of node indices over all facets carrying `tag`.
  std::set<int> boundary_nodes(const std::string& tag) const;
  /// All nodes lying on any tagged facet.
  const std::set<int>& boundary_node_set() const { return boundary_nodes_; }
  bool is_boundary_node(int i) const { return boundary_flag_[i] != 0; }

  double total_volume() const { return total_volume_; }
  double diameter() const { return diameter_; }
  Eigen::VectorXd bbox_min() const { return bbox_min_; }
  Eigen::VectorXd bbox_max() const { return bbox_max_; }

  /// Validates topology, repairs element orientation, computes geometry.
  /// Must be called after the raw arrays are filled; load() and the
  /// generators do this automatically.
  void finalize();

  static Mesh load(const std::string& path);
  static Mesh parse(std::istream& in, const std::string& origin = "<stream>");
  void save(const std::string& path) const;

  /// Structured rectangle [0,lx] x [0,ly]; tags left/right/bottom/top.
  /// With crossed=true every cell is split into 4 triangles about its
  /// centroid (better bending behavior for slender geometry), otherwise
  /// into 2 right triangles.
  static Mesh rectangle(double lx, double ly, int nx, int ny, bool crossed = false);

  /// Regular hexagon of side `side` centered at the origin, triangulated
  /// into 6*n^2 equilateral triangles. Single boundary tag "rim".
  /// All angles are 60 degrees, so the P1 stiffness matrix is an M-matrix
  /// and the discrete maximum principle holds for heat conduction.
  static Mesh hexagon(double side, int n);

  /// Uniform refinement: each triangle into 4 via edge midpoints (2D only).
  Mesh refined() const;

private:
  std::vector<ElementGeometry> geometry_;
  std::set<int> boundary_nodes_;
  std::vector<char> boundary_flag_;
  double total_volume_ = 0.0;
  double diameter_ = 0.0;
  Eigen::VectorXd bbox_min_, bbox_max_;
};

/// Geometry of element e computed from scratch (grads exact for affine
/// simplices). Positions may override the mesh coordinates, e.g. for a
/// deformed configuration. Throws DegenerateElement below the volume cutoff.
ElementGeometry element_geometry(const Mesh& mesh, int e,
                                 const std::vector<double>* positions = nullptr);

}  // namespace inveldes
