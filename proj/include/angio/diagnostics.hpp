#pragma once

#include <string>
#include <vector>

#include "angio/mesh.hpp"
#include "angio/model.hpp"
#include "angio/scheme.hpp"

namespace angio {

// sum_j w_j f_j
double total_mass(const Vector& w, const Vector& field);

// Reduced Cahn-Hilliard Lyapunov functional of the committed tumor fraction:
//   E = sum_j w_j Pi psi(phi_T_j) + Pi eps^2 / 2 (K_I phi_T) . phi_T.
// Non-increasing across steps when sources and chemotaxis are off.
double ch_energy(const MeshOperators& ops, const ModelParams& p, const Vector& phi_T);

// Optional addends of the full mixture energy, reported with user-supplied
// weights (all default 0): vasculature entropy, chemical gradient energies,
// and the chemotactic coupling terms.
struct EnergyWeights {
    double k_a = 0.0;    // Pi k_a phi_a (log phi_a - 1)
    double d_n = 0.0;    // d_n/2 |grad n|^2 (D-weighted)
    double d_c = 0.0;    // d_c/2 |grad c|^2 (D-weighted)
    double chi_v = 0.0;  // -chi_v n phi_v
    double chi_a = 0.0;  // -chi_a c phi_a
};
struct EnergyAddends {
    double entropy_a = 0.0, grad_n = 0.0, grad_c = 0.0, chemo_v = 0.0, chemo_a = 0.0;
    double total() const { return entropy_a + grad_n + grad_c + chemo_v + chemo_a; }
};
EnergyAddends energy_addends(const MeshOperators& ops, const ModelParams& p,
                             const SimulationState& s, const EnergyWeights& weights);

// One CSV row per committed step (row 0 carries the initial state).
struct StepReport {
    long step = 0;
    double t = 0.0, dt = 0.0;
    int outer_iters = 0, halvings = 0;
    double mass_v = 0, mass_d = 0, mass_a = 0, mass_n = 0, mass_c = 0;
    double min_v = 0, max_v = 0, min_d = 0, max_d = 0, min_a = 0, max_a = 0;
    double min_n = 0, max_n = 0, min_c = 0, max_c = 0;
    double max_solid = 0;  // max over nodes of phi_v + phi_d + phi_a
    double energy = 0;     // reduced Cahn-Hilliard energy

    static std::string csv_header();
    std::string csv_row() const;
};

StepReport make_step_report(long step, const SimulationState& s, const MeshOperators& ops,
                            const ModelParams& p, const AdvanceReport& adv);

struct ConstraintReport {
    double min_v = 0, min_d = 0, max_T = 0;
    double min_a = 0, max_a = 0, min_n = 0, max_n = 0, min_c = 0, max_c = 0;
    double max_solid = 0;
    bool ok_positivity = false;  // phi_v, phi_d >= 0 nodewise, exactly
    bool ok_saturation = false;  // phi_v + phi_d < 1 nodewise
    bool ok_boxes = false;       // phi_a, n, c in [0,1] within 1e-12
    bool ok() const { return ok_positivity && ok_saturation && ok_boxes; }
};
ConstraintReport constraint_report(const SimulationState& s);

struct ProbeSample {
    double s = 0.0;  // arc length from the segment start
    double phi_v = 0, phi_d = 0, phi_a = 0, n = 0, c = 0;
    bool inside = false;  // the sample fell inside some cell
};

// P1 interpolation of the five concentration fields along a segment sampled
// at `samples` equispaced points (endpoints included). Containment uses a
// barycentric test with 1e-10 slack; samples outside the mesh are flagged,
// never extrapolated.
std::vector<ProbeSample> line_probe(const SimplicialMesh& mesh, const SimulationState& s,
                                    const SmallVec& from, const SmallVec& to, int samples);

}  // namespace angio
