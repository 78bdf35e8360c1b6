#pragma once

#include "angio/config.hpp"
#include "angio/mesh.hpp"
#include "angio/scheme.hpp"

namespace angio {

struct CaseSetup {
    SimplicialMesh mesh;
    SimulationState state;
};

// Uniform simplicial box mesh (squares split into 2 triangles, cubes into 6
// tetrahedra), D = T = identity, grey matter except an optional white-matter
// band in x, irc = 1 unless a resection shoulder is supplied.
SimplicialMesh build_box_mesh(const RunConfig& cfg, bool resection_irc);

// Sphere of viable cells (phi_v = phi_v0 inside `radius`) in fully
// vascularized tissue: n = 1, everything else 0.
CaseSetup generate_sphere_case(const RunConfig& cfg);

// Post-resection bed: irc ramps 0 -> 1 across a smooth shoulder outside
// `radius`, n(0) = irc, and phi_v = phi_bar seeds a deterministic random
// selection (shell_fraction, seed) of the nodes of the cells cut by the
// resection boundary.
CaseSetup generate_resection_case(const RunConfig& cfg);

// Mesh from cfg.mesh_path, healthy initial state.
CaseSetup load_custom_case(const RunConfig& cfg);

CaseSetup generate_case(const RunConfig& cfg);

}  // namespace angio
