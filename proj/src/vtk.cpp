#include "inveldes/vtk.hpp"

#include <cstdio>
#include <fstream>

namespace inveldes {

namespace {

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v == 0.0 ? 0.0 : v);  // normalize -0
  return buf;
}

}  // namespace

void write_vtk(const Mesh& mesh, PositionVariant variant, const FieldOutput& f,
               const std::string& path) {
  const int d = mesh.dim;
  const int nn = mesh.num_nodes();
  const int ne = mesh.num_elements();
  auto check = [&](Eigen::Index got, Eigen::Index want, const char* what) {
    if (got != want) throw IoError(std::string("field '") + what + "' has inconsistent size");
  };
  check(f.u.size(), static_cast<Eigen::Index>(nn) * d, "u");
  check(f.r.size(), static_cast<Eigen::Index>(nn) * d, "r");
  check(f.theta.size(), nn, "theta");
  check(f.theta0.size(), nn, "theta0");
  check(static_cast<Eigen::Index>(f.cauchy.size()), static_cast<Eigen::Index>(ne) * d * d, "sigma");
  check(f.snorm.size(), ne, "sigma_snorm");

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");

    const Vector* shift = variant == PositionVariant::Initial      ? &f.r
                          : variant == PositionVariant::Equilibrium ? &f.u
                                                                    : nullptr;
    out << "# vtk DataFile Version 3.0\n";
    out << "inveldes fields\n";
    out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nn << " double\n";
    for (int i = 0; i < nn; ++i) {
      double p[3] = {0.0, 0.0, 0.0};
      for (int c = 0; c < d; ++c) {
        p[c] = mesh.coords[static_cast<std::size_t>(i) * d + c];
        if (shift) p[c] += (*shift)[static_cast<Eigen::Index>(i) * d + c];
      }
      out << g9(p[0]) << " " << g9(p[1]) << " " << g9(p[2]) << "\n";
    }
    out << "CELLS " << ne << " " << ne * (d + 2) << "\n";
    for (int e = 0; e < ne; ++e) {
      const int* n = mesh.element(e);
      out << (d + 1);
      for (int k = 0; k <= d; ++k) out << " " << n[k];
      out << "\n";
    }
    out << "CELL_TYPES " << ne << "\n";
    for (int e = 0; e < ne; ++e) out << (d == 2 ? 5 : 10) << "\n";

    out << "POINT_DATA " << nn << "\n";
    auto vectors = [&](const char* name, const Vector& v) {
      out << "VECTORS " << name << " double\n";
      for (int i = 0; i < nn; ++i) {
        double p[3] = {0.0, 0.0, 0.0};
        for (int c = 0; c < d; ++c) p[c] = v[static_cast<Eigen::Index>(i) * d + c];
        out << g9(p[0]) << " " << g9(p[1]) << " " << g9(p[2]) << "\n";
      }
    };
    auto scalars_point = [&](const char* name, const Vector& v) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (int i = 0; i < nn; ++i) out << g9(v[i]) << "\n";
    };
    vectors("u", f.u);
    vectors("r", f.r);
    scalars_point("theta", f.theta);
    scalars_point("theta0", f.theta0);

    out << "CELL_DATA " << ne << "\n";
    out << "TENSORS sigma double\n";
    for (int e = 0; e < ne; ++e) {
      double t[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          t[i][j] = f.cauchy[static_cast<std::size_t>(e) * d * d + i * d + j];
      for (int i = 0; i < 3; ++i)
        out << g9(t[i][0]) << " " << g9(t[i][1]) << " " << g9(t[i][2]) << "\n";
    }
    out << "SCALARS sigma_snorm double 1\nLOOKUP_TABLE default\n";
    for (int e = 0; e < ne; ++e) out << g9(f.snorm[e]) << "\n";

    if (!out) throw IoError("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot move '" + tmp + "' to '" + path + "'");
}

}  // namespace inveldes
