#include "inveldes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

namespace inveldes {

namespace {

// Signed volume of the simplex spanned by nodes n[0..d].
double signed_volume(int dim, const std::vector<double>& coords, const int* n) {
  if (dim == 2) {
    const double* a = &coords[2 * static_cast<std::size_t>(n[0])];
    const double* b = &coords[2 * static_cast<std::size_t>(n[1])];
    const double* c = &coords[2 * static_cast<std::size_t>(n[2])];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
  }
  const double* a = &coords[3 * static_cast<std::size_t>(n[0])];
  Eigen::Matrix3d m;
  for (int k = 0; k < 3; ++k) {
    const double* p = &coords[3 * static_cast<std::size_t>(n[k + 1])];
    for (int c = 0; c < 3; ++c) m(c, k) = p[c] - a[c];
  }
  return m.determinant() / 6.0;
}

std::vector<int> sorted_key(const int* nodes, int n) {
  std::vector<int> k(nodes, nodes + n);
  std::sort(k.begin(), k.end());
  return k;
}

}  // namespace

int Mesh::tag_index(const std::string& tag) const {
  for (std::size_t i = 0; i < tags.size(); ++i)
    if (tags[i] == tag) return static_cast<int>(i);
  throw UnknownTag("unknown boundary tag '" + tag + "'");
}

bool Mesh::has_tag(const std::string& tag) const {
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

std::set<int> Mesh::boundary_nodes(const std::string& tag) const {
  const int ti = tag_index(tag);
  std::set<int> out;
  for (const Facet& f : facets)
    if (f.tag == ti)
      for (int k = 0; k < dim; ++k) out.insert(f.nodes[k]);
  return out;
}

ElementGeometry element_geometry(const Mesh& mesh, int e,
                                 const std::vector<double>* positions) {
  const std::vector<double>& xs = positions ? *positions : mesh.coords;
  const int d = mesh.dim;
  const int* n = mesh.element(e);

  const double vol = signed_volume(d, xs, n);
  double scale = 1.0;
  for (int c = 0; c < d; ++c) {
    double lo = xs[static_cast<std::size_t>(n[0]) * d + c], hi = lo;
    for (int k = 1; k <= d; ++k) {
      const double v = xs[static_cast<std::size_t>(n[k]) * d + c];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    scale *= std::max(hi - lo, 1e-300);
  }
  if (std::abs(vol) < 1e-14 * std::max(scale, 1e-300))
    throw DegenerateElement("element " + std::to_string(e) + " has volume " + std::to_string(vol));

  // Gradients of the P1 basis: rows of the inverse edge matrix; the first
  // gradient follows from the partition-of-unity property.
  ElementGeometry g;
  g.volume = std::abs(vol);
  g.grads.assign(d + 1, Eigen::VectorXd::Zero(d));
  Eigen::MatrixXd edges(d, d);
  for (int k = 0; k < d; ++k)
    for (int c = 0; c < d; ++c)
      edges(c, k) = xs[static_cast<std::size_t>(n[k + 1]) * d + c] -
                    xs[static_cast<std::size_t>(n[0]) * d + c];
  const Eigen::MatrixXd inv = edges.inverse();
  for (int k = 0; k < d; ++k) {
    g.grads[k + 1] = inv.row(k).transpose();
    g.grads[0] -= g.grads[k + 1];
  }
  return g;
}

void Mesh::finalize() {
  const int d = dim;
  if (d != 2 && d != 3) throw TopologyError("unsupported dimension " + std::to_string(d));
  const int nn = num_nodes();
  const int ne = num_elements();

  for (int idx : elem_nodes)
    if (idx < 0 || idx >= nn)
      throw TopologyError("element references node " + std::to_string(idx) + " out of range");
  for (const Facet& f : facets)
    for (int k = 0; k < d; ++k)
      if (f.nodes[k] < 0 || f.nodes[k] >= nn)
        throw TopologyError("facet references node " + std::to_string(f.nodes[k]) + " out of range");

  // Repair orientation so every signed volume is positive.
  for (int e = 0; e < ne; ++e) {
    int* n = &elem_nodes[static_cast<std::size_t>(e) * (d + 1)];
    if (signed_volume(d, coords, n) < 0.0) std::swap(n[0], n[1]);
  }

  // Map boundary sub-simplices (facets owned by exactly one element) to their
  // owner so tagged facets can be matched and untagged ones detected.
  std::map<std::vector<int>, std::pair<int, int>> face_count;  // key -> (count, element)
  for (int e = 0; e < ne; ++e) {
    const int* n = element(e);
    for (int skip = 0; skip <= d; ++skip) {
      std::vector<int> face;
      for (int k = 0; k <= d; ++k)
        if (k != skip) face.push_back(n[k]);
      std::sort(face.begin(), face.end());
      auto& fc = face_count[face];
      fc.first++;
      fc.second = e;
    }
  }

  std::map<std::vector<int>, int> tagged;  // boundary face -> facet index
  for (std::size_t i = 0; i < facets.size(); ++i) {
    Facet& f = facets[i];
    auto key = sorted_key(f.nodes.data(), d);
    auto it = face_count.find(key);
    if (it == face_count.end() || it->second.first != 1)
      throw TopologyError("tagged facet is not a boundary facet of exactly one element");
    if (!tagged.emplace(key, static_cast<int>(i)).second)
      throw TopologyError("boundary facet tagged more than once");
    f.element = it->second.second;
  }
  for (const auto& [key, fc] : face_count) {
    if (fc.first == 1 && tagged.find(key) == tagged.end()) {
      std::string nodes;
      for (int idx : key) nodes += " " + std::to_string(idx);
      throw TopologyError("untagged boundary facet:" + nodes);
    }
  }

  // Geometry caches.
  geometry_.clear();
  geometry_.reserve(ne);
  total_volume_ = 0.0;
  for (int e = 0; e < ne; ++e) {
    geometry_.push_back(element_geometry(*this, e));
    total_volume_ += geometry_.back().volume;
  }

  bbox_min_ = Eigen::VectorXd::Constant(d, 1e300);
  bbox_max_ = Eigen::VectorXd::Constant(d, -1e300);
  for (int i = 0; i < nn; ++i)
    for (int c = 0; c < d; ++c) {
      bbox_min_[c] = std::min(bbox_min_[c], coords[static_cast<std::size_t>(i) * d + c]);
      bbox_max_[c] = std::max(bbox_max_[c], coords[static_cast<std::size_t>(i) * d + c]);
    }
  diameter_ = (bbox_max_ - bbox_min_).norm();

  // Facet normals and areas; outward = pointing away from the opposite vertex.
  for (Facet& f : facets) {
    const int* en = element(f.element);
    int opposite = -1;
    for (int k = 0; k <= d; ++k) {
      bool in_facet = false;
      for (int j = 0; j < d; ++j) in_facet |= (f.nodes[j] == en[k]);
      if (!in_facet) opposite = en[k];
    }
    Eigen::Vector3d nrm = Eigen::Vector3d::Zero();
    if (d == 2) {
      const auto a = node(f.nodes[0]), b = node(f.nodes[1]);
      const double tx = b[0] - a[0], ty = b[1] - a[1];
      f.area = std::hypot(tx, ty);
      nrm << ty, -tx, 0.0;
    } else {
      const auto a = node(f.nodes[0]), b = node(f.nodes[1]), c = node(f.nodes[2]);
      const Eigen::Vector3d ab(b[0] - a[0], b[1] - a[1], b[2] - a[2]);
      const Eigen::Vector3d ac(c[0] - a[0], c[1] - a[1], c[2] - a[2]);
      nrm = ab.cross(ac);
      f.area = 0.5 * nrm.norm();
    }
    nrm.normalize();
    Eigen::Vector3d to_opposite = Eigen::Vector3d::Zero();
    for (int c = 0; c < d; ++c)
      to_opposite[c] = coords[static_cast<std::size_t>(opposite) * d + c] -
                       coords[static_cast<std::size_t>(f.nodes[0]) * d + c];
    if (nrm.dot(to_opposite) > 0.0) nrm = -nrm;
    f.normal = nrm;
  }

  boundary_nodes_.clear();
  boundary_flag_.assign(nn, 0);
  for (const Facet& f : facets)
    for (int k = 0; k < d; ++k) {
      boundary_nodes_.insert(f.nodes[k]);
      boundary_flag_[f.nodes[k]] = 1;
    }
}

Mesh Mesh::parse(std::istream& in, const std::string& origin) {
  Mesh m;
  std::size_t lineno = 0;
  std::string line;

  auto next_tokens = [&](std::vector<std::string>& toks) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream iss(line);
      toks.assign(std::istream_iterator<std::string>(iss), {});
      if (!toks.empty() && toks[0][0] != '#') return true;
    }
    return false;
  };
  auto fail = [&](const std::string& what) -> void {
    throw ParseError(origin + ": " + what, lineno);
  };

  auto to_int = [&](const std::string& s) -> int {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      fail("bad integer '" + s + "'");
    }
    if (pos != s.size()) fail("bad integer '" + s + "'");
    return v;
  };
  auto to_double = [&](const std::string& s) -> double {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      fail("bad number '" + s + "'");
    }
    if (pos != s.size()) fail("bad number '" + s + "'");
    return v;
  };

  std::vector<std::string> t;
  if (!next_tokens(t) || t.size() != 2 || t[0] != "dim") fail("expected 'dim <d>'");
  m.dim = to_int(t[1]);
  if (m.dim != 2 && m.dim != 3) fail("dim must be 2 or 3");

  if (!next_tokens(t) || t.size() != 2 || t[0] != "nodes") fail("expected 'nodes <N>'");
  const int nn = to_int(t[1]);
  m.coords.reserve(static_cast<std::size_t>(nn) * m.dim);
  for (int i = 0; i < nn; ++i) {
    if (!next_tokens(t) || static_cast<int>(t.size()) != m.dim) fail("expected node coordinates");
    for (const auto& s : t) m.coords.push_back(to_double(s));
  }

  if (!next_tokens(t) || t.size() != 2 || t[0] != "elements") fail("expected 'elements <M>'");
  const int ne = to_int(t[1]);
  for (int e = 0; e < ne; ++e) {
    if (!next_tokens(t) || static_cast<int>(t.size()) != m.dim + 1) fail("expected element node indices");
    for (const auto& s : t) m.elem_nodes.push_back(to_int(s));
  }

  if (!next_tokens(t) || t.size() != 2 || t[0] != "facets") fail("expected 'facets <K>'");
  const int nf = to_int(t[1]);
  for (int f = 0; f < nf; ++f) {
    if (!next_tokens(t) || static_cast<int>(t.size()) != m.dim + 1) fail("expected 'tag i0 ... i(d-1)'");
    Facet fc;
    auto it = std::find(m.tags.begin(), m.tags.end(), t[0]);
    if (it == m.tags.end()) {
      m.tags.push_back(t[0]);
      fc.tag = static_cast<int>(m.tags.size()) - 1;
    } else {
      fc.tag = static_cast<int>(it - m.tags.begin());
    }
    for (int k = 0; k < m.dim; ++k) fc.nodes[k] = to_int(t[k + 1]);
    m.facets.push_back(fc);
  }

  m.finalize();
  return m;
}

Mesh Mesh::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file '" + path + "'");
  return parse(in, path);
}

void Mesh::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  char buf[64];
  out << "dim " << dim << "\n";
  out << "nodes " << num_nodes() << "\n";
  for (int i = 0; i < num_nodes(); ++i) {
    for (int c = 0; c < dim; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", coords[static_cast<std::size_t>(i) * dim + c]);
      out << (c ? " " : "") << buf;
    }
    out << "\n";
  }
  out << "elements " << num_elements() << "\n";
  for (int e = 0; e < num_elements(); ++e) {
    const int* n = element(e);
    for (int k = 0; k <= dim; ++k) out << (k ? " " : "") << n[k];
    out << "\n";
  }
  out << "facets " << num_facets() << "\n";
  for (const Facet& f : facets) {
    out << tags[f.tag];
    for (int k = 0; k < dim; ++k) out << " " << f.nodes[k];
    out << "\n";
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

Mesh Mesh::rectangle(double lx, double ly, int nx, int ny, bool crossed) {
  Mesh m;
  m.dim = 2;
  m.tags = {"left", "right", "bottom", "top"};
  const int npx = nx + 1, npy = ny + 1;
  auto vid = [&](int i, int j) { return i * npy + j; };
  for (int i = 0; i < npx; ++i)
    for (int j = 0; j < npy; ++j) {
      m.coords.push_back(lx * i / nx);
      m.coords.push_back(ly * j / ny);
    }
  if (crossed) {
    // one extra node at each cell centroid, 4 triangles per cell
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        const int cm = static_cast<int>(m.coords.size()) / 2;
        m.coords.push_back(lx * (i + 0.5) / nx);
        m.coords.push_back(ly * (j + 0.5) / ny);
        const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
        const int tri[4][3] = {{v00, v10, cm}, {v10, v11, cm}, {v11, v01, cm}, {v01, v00, cm}};
        for (auto& tr : tri) m.elem_nodes.insert(m.elem_nodes.end(), tr, tr + 3);
      }
  } else {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
        const int tri[2][3] = {{v00, v10, v11}, {v00, v11, v01}};
        for (auto& tr : tri) m.elem_nodes.insert(m.elem_nodes.end(), tr, tr + 3);
      }
  }
  auto add_facet = [&](int tag, int a, int b) {
    Facet f;
    f.tag = tag;
    f.nodes = {a, b, -1};
    m.facets.push_back(f);
  };
  for (int j = 0; j < ny; ++j) add_facet(0, vid(0, j), vid(0, j + 1));
  for (int j = 0; j < ny; ++j) add_facet(1, vid(nx, j), vid(nx, j + 1));
  for (int i = 0; i < nx; ++i) add_facet(2, vid(i, 0), vid(i + 1, 0));
  for (int i = 0; i < nx; ++i) add_facet(3, vid(i, ny), vid(i + 1, ny));
  m.finalize();
  return m;
}

Mesh Mesh::hexagon(double side, int n) {
  Mesh m;
  m.dim = 2;
  m.tags = {"rim"};
  const double h = side / n;
  const Eigen::Vector2d a(h, 0.0), b(0.5 * h, 0.5 * std::sqrt(3.0) * h);

  // Triangular lattice on axial coordinates (i, j) with hex-distance <= n.
  std::map<std::pair<int, int>, int> id;
  auto hexdist = [](int i, int j) {
    return std::max({std::abs(i), std::abs(j), std::abs(i + j)});
  };
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      if (hexdist(i, j) > n) continue;
      id[{i, j}] = static_cast<int>(m.coords.size()) / 2;
      const Eigen::Vector2d p = i * a + j * b;
      m.coords.push_back(p[0]);
      m.coords.push_back(p[1]);
    }
  auto at = [&](int i, int j) -> int {
    auto it = id.find({i, j});
    return it == id.end() ? -1 : it->second;
  };
  for (int i = -n - 1; i <= n; ++i)
    for (int j = -n - 1; j <= n; ++j) {
      // upward triangle (i,j)-(i+1,j)-(i,j+1), downward (i+1,j)-(i+1,j+1)-(i,j+1)
      if (at(i, j) >= 0 && at(i + 1, j) >= 0 && at(i, j + 1) >= 0) {
        const int tr[3] = {at(i, j), at(i + 1, j), at(i, j + 1)};
        m.elem_nodes.insert(m.elem_nodes.end(), tr, tr + 3);
      }
      if (at(i + 1, j) >= 0 && at(i + 1, j + 1) >= 0 && at(i, j + 1) >= 0) {
        const int td[3] = {at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
        m.elem_nodes.insert(m.elem_nodes.end(), td, td + 3);
      }
    }
  // rim facets: walk the six sides
  auto add_facet = [&](int p, int q) {
    Facet f;
    f.tag = 0;
    f.nodes = {p, q, -1};
    m.facets.push_back(f);
  };
  for (int k = 0; k < n; ++k) {
    add_facet(at(n - k, k), at(n - k - 1, k + 1));        // i+j = n side
    add_facet(at(-k, n), at(-k - 1, n));                  // j = n side
    add_facet(at(-n, n - k), at(-n, n - k - 1));          // i = -n side
    add_facet(at(-n + k, -k), at(-n + k + 1, -k - 1));    // i+j = -n side
    add_facet(at(k, -n), at(k + 1, -n));                  // j = -n side
    add_facet(at(n, -n + k), at(n, -n + k + 1));          // i = n side
  }
  m.finalize();
  return m;
}

Mesh Mesh::refined() const {
  if (dim != 2) throw TopologyError("uniform refinement implemented for 2D meshes only");
  Mesh m;
  m.dim = 2;
  m.tags = tags;
  m.coords = coords;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int p, int q) {
    auto key = std::minmax(p, q);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int idx = static_cast<int>(m.coords.size()) / 2;
    m.coords.push_back(0.5 * (coords[2 * static_cast<std::size_t>(p)] + coords[2 * static_cast<std::size_t>(q)]));
    m.coords.push_back(0.5 * (coords[2 * static_cast<std::size_t>(p) + 1] + coords[2 * static_cast<std::size_t>(q) + 1]));
    midpoint[key] = idx;
    return idx;
  };
  for (int e = 0; e < num_elements(); ++e) {
    const int* n = element(e);
    const int m01 = mid(n[0], n[1]), m12 = mid(n[1], n[2]), m20 = mid(n[2], n[0]);
    const int tr[4][3] = {{n[0], m01, m20}, {n[1], m12, m01}, {n[2], m20, m12}, {m01, m12, m20}};
    for (auto& t : tr) m.elem_nodes.insert(m.elem_nodes.end(), t, t + 3);
  }
  for (const Facet& f : facets) {
    const int mm = mid(f.nodes[0], f.nodes[1]);
    Facet f1, f2;
    f1.tag = f2.tag = f.tag;
    f1.nodes = {f.nodes[0], mm, -1};
    f2.nodes = {mm, f.nodes[1], -1};
    m.facets.push_back(f1);
    m.facets.push_back(f2);
  }
  m.finalize();
  return m;
}

}  // namespace inveldes
