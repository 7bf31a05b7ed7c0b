#pragma once

#include <string>

#include "inveldes/mesh.hpp"

namespace inveldes {

/// Nodal and per-element result arrays written to legacy VTK.
struct FieldOutput {
  Vector u, r, theta, theta0;  // point data (u, r: dim per node)
  std::vector<double> cauchy;  // cell data, dim*dim per element
  Vector snorm;                // cell data, spectral norm of the Cauchy stress
};

enum class PositionVariant { Reference, Initial, Equilibrium };

/// Legacy ASCII VTK unstructured grid with the node positions of the chosen
/// configuration (reference x, initial x + r, equilibrium x + u). Numbers are
/// printed with 9 significant digits so identical inputs give byte-identical
/// files; the write goes through a temp file and an atomic rename.
void write_vtk(const Mesh& mesh, PositionVariant variant, const FieldOutput& fields,
               const std::string& path);

}  // namespace inveldes
