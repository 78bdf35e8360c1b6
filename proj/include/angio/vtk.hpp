#pragma once

#include <string>

#include "angio/mesh.hpp"
#include "angio/scheme.hpp"

namespace angio {

// Legacy ASCII VTK unstructured grid with point data phi_v, phi_d, phi_a, n,
// c and cell data tissue, irc. 9 significant digits.
void write_vtk(const std::string& path, const SimplicialMesh& mesh,
               const SimulationState& state);

// Geometry and point fields parsed back from a state file (the multipliers
// are not stored and come back as zeros).
struct VtkState {
    int dim = 0;
    Matrix nodes;
    IntMatrix cells;
    SimulationState state;
};

VtkState read_vtk(const std::string& path);

}  // namespace angio
