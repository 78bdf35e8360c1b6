#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "angio/fem.hpp"
#include "angio/mesh.hpp"
#include "angio/model.hpp"

namespace angio {

// Nodal fields of one committed time level.
struct SimulationState {
    double t = 0.0;
    double dt = 0.0;  // dt used by the last committed step
    Vector phi_v, phi_d, phi_a, n, c;
    Vector sigma_v, sigma_d;  // chemical potential multipliers
};

// Zero phases, n = 1, c = 0: healthy tissue, an exact fixed point.
SimulationState healthy_state(Eigen::Index n_nodes);

// Mesh-constant operators shared by every step of a run.
struct MeshOperators {
    Vector w;             // lumped mass diagonal
    SpMat K_I, K_D, K_T;  // unweighted stiffness: identity / D / T tensor
    Vector hv_cell;       // per-cell h_v including the white-matter factor
    Vector lnv_node;      // nodal l_nv including the white-matter factor
    Vector irc_node;      // nodal resection indicator
};

MeshOperators make_operators(const SimplicialMesh& mesh, const ModelParams& p);

// A node is passive for a phase when the previous-step field vanishes on the
// whole support of its basis function (the node and all its mesh neighbors).
struct ActiveSets {
    std::vector<std::uint8_t> passive_v, passive_d;
};

ActiveSets classify_nodes(const SimplicialMesh& mesh, const Vector& phi_v_prev,
                          const Vector& phi_d_prev, double tol = 1e-14);

// Knobs of the semi-implicit step; defaults match the reference scheme.
struct StepControls {
    double outer_tol = 1e-6;       // infinity-norm stopping test of the outer loop
    int max_outer = 200;
    double proj_tol = 1e-6;        // successive-iterate tolerance of the projection
    int max_inner = 500;
    double mu = 0.0;               // relaxation; <= 0 means mu = dt
    double omega = 0.0;            // projection step size; <= 0 means adaptive
    double dt_scale = 1.0;         // multiplies the adaptive dt (testing hook)
    double dt_cap = 0.0;           // upper bound on dt, e.g. to land on t_end; 0 = none
    int max_halvings = 20;
};

// One backward-Euler reaction-diffusion solve, shared by the three chemical
// fields:  (u/dt, t)^h + diff (M grad u, grad t) + (react u, t)^h
//            = (prev/dt + supply, t)^h + extra . t
Vector solve_reaction_diffusion(const SimplicialMesh& mesh, const MeshOperators& ops,
                                TensorField which, double diff, double dt,
                                const Vector& prev, const Vector& react,
                                const Vector& supply, const Vector* extra = nullptr);

// Step 0: sequential linear solves for n, c, phi_a, in that order; the new n
// enters the TAF production and the new c the vasculature drift and growth.
// Returns false when any output leaves [-1e-12, 1+1e-12] (step must be
// retried with a smaller dt); in-band values are clamped to [0, 1].
bool step_chemicals(const SimplicialMesh& mesh, const MeshOperators& ops,
                    const ModelParams& p, const SimulationState& prev, double dt,
                    Vector& n_new, Vector& c_new, Vector& a_new);

// Step 1: z_j = phi_j - mu (Pi eps^2 (K_I phi_T)_j / w_j
//                           + Pi psi2'(phi_T_prev_j) - sigma_j)
Vector step_forcing(const MeshOperators& ops, const ModelParams& p, double mu,
                    const Vector& phi_k, const Vector& phi_T_k, const Vector& sigma_k,
                    const Vector& phi_T_prev);

// Scalar obstacle problem at one active node:
//   phi >= 0,  phi + mu_pi psi1'(phi + phi_other) - z >= 0,  complementarity.
// Solved by safeguarded projected gradient; omega <= 0 selects the adaptive
// step 1/(1 + mu_pi psi1''(phi + phi_other)) clamped to [1e-3, 1], which is a
// damped Newton iteration. Throws StepReject on the iteration cap or when
// phi_other saturates the barrier.
double project_node(double z, double phi_other, double mu_pi, double phi_bar,
                    double omega, double tol, int max_inner);

// Step 2 for one species; passive nodes copy passive_value.
Vector project_nodewise(const Vector& z, const Vector& phi_other_k,
                        const std::vector<std::uint8_t>& passive,
                        const Vector& passive_value, double mu_pi, double phi_bar,
                        double omega, double tol, int max_inner);

// Step 3: the four-field linear system in [phi_v, Sigma_v, phi_d, Sigma_d]
// with the degenerate mobility handled by lagged defect correction. The
// matrix depends only on (mesh, dt, mu, params), so one factorization serves
// every outer iteration of a time step attempt.
class CoupledStep {
public:
    CoupledStep(const SimplicialMesh& mesh, const MeshOperators& ops,
                const ModelParams& p, const SimulationState& prev,
                const Vector& n_new, double dt, double mu, double k_t);
    ~CoupledStep();
    CoupledStep(CoupledStep&&) noexcept;

    struct Iterate {
        Vector phi_v, sigma_v, phi_d, sigma_d;
    };
    Iterate solve(const Vector& z_v, const Vector& z_d, const Vector& phi_v_half,
                  const Vector& phi_d_half, const Vector& sigma_v_k,
                  const Vector& sigma_d_k) const;

    const SpMat& matrix() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Per-cell reconstruction of the viable-cell velocity J_v / phi_v:
//   v = b'(phi) (h_v T grad n - T grad Sigma_v / L_v),
//   b' = (1 - phi_v - phi_d)^2 / (1 + phi_a)^2
// with b' averaged over the cell's vertices. Returns an n_cells x dim matrix.
Matrix cell_velocity(const SimplicialMesh& mesh, const ModelParams& p,
                     const SimulationState& s);

// CFL-limited step: min(100 L_v eps^2 / Pi, h_min / (2 v_max)) where v_max is
// the largest nodal 1-norm of the volume-weighted velocity recovery.
double adaptive_dt(const SimplicialMesh& mesh, const ModelParams& p,
                   const SimulationState& s);

struct AdvanceReport {
    double dt = 0.0;      // committed dt
    int outer_iters = 0;  // coupled solves performed by the accepted attempt
    int halvings = 0;
};

// One committed time step: adaptive dt, Step 0, outer Step 1-3 loop until the
// stopping test ||dphi_v||_inf + ||dphi_d||_inf < outer_tol on successive
// linear iterates, then commit of the converged linear iterate clamped at
// zero (the linear iterate conserves the discrete phase masses exactly, the
// clamp restores exact nonnegativity). Constraint violations, saturated
// barriers and iteration caps reject the attempt and halve dt, up to
// max_halvings; after that the step aborts with NumericalAbort.
AdvanceReport advance_time_step(const SimplicialMesh& mesh, const MeshOperators& ops,
                                const ModelParams& p, const TherapySchedule& therapy,
                                const StepControls& ctl, SimulationState& state);

}  // namespace angio
