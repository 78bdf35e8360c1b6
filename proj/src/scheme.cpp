#include "angio/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "angio/errors.hpp"

namespace angio {

SimulationState healthy_state(Eigen::Index n_nodes) {
    SimulationState s;
    s.phi_v = Vector::Zero(n_nodes);
    s.phi_d = Vector::Zero(n_nodes);
    s.phi_a = Vector::Zero(n_nodes);
    s.n = Vector::Ones(n_nodes);
    s.c = Vector::Zero(n_nodes);
    s.sigma_v = Vector::Zero(n_nodes);
    s.sigma_d = Vector::Zero(n_nodes);
    return s;
}

MeshOperators make_operators(const SimplicialMesh& mesh, const ModelParams& p) {
    MeshOperators ops;
    ops.w = lumped_mass(mesh);
    ops.K_I = assemble_stiffness(mesh, TensorField::Identity);
    ops.K_D = assemble_stiffness(mesh, TensorField::D);
    ops.K_T = assemble_stiffness(mesh, TensorField::T);
    const Eigen::Index nc = mesh.n_cells();
    ops.hv_cell.resize(nc);
    Vector lnv_cell(nc);
    for (Eigen::Index k = 0; k < nc; ++k) {
        const double f = mesh.tissue(k) == kWM ? p.wm_factor : 1.0;
        ops.hv_cell[k] = p.h_v * f;
        lnv_cell[k] = p.l_nv * f;
    }
    ops.lnv_node = mesh.nodal_average(lnv_cell);
    ops.irc_node = mesh.nodal_average(mesh.irc());
    return ops;
}

ActiveSets classify_nodes(const SimplicialMesh& mesh, const Vector& phi_v_prev,
                          const Vector& phi_d_prev, double tol) {
    const Eigen::Index n = mesh.n_nodes();
    ActiveSets sets;
    sets.passive_v.assign(n, 0);
    sets.passive_d.assign(n, 0);
    auto passive_at = [&](const Vector& f, Eigen::Index j) {
        if (std::abs(f[j]) > tol) return false;
        for (int nb : mesh.node_neighbors(j))
            if (std::abs(f[nb]) > tol) return false;
        return true;
    };
    for (Eigen::Index j = 0; j < n; ++j) {
        sets.passive_v[j] = passive_at(phi_v_prev, j) ? 1 : 0;
        sets.passive_d[j] = passive_at(phi_d_prev, j) ? 1 : 0;
    }
    return sets;
}

Vector solve_reaction_diffusion(const SimplicialMesh& mesh, const MeshOperators& ops,
                                TensorField which, double diff, double dt, const Vector& prev,
                                const Vector& react, const Vector& supply, const Vector* extra) {
    (void)mesh;
    const SpMat& K = which == TensorField::D   ? ops.K_D
                     : which == TensorField::T ? ops.K_T
                                               : ops.K_I;
    SpMat A = diff * K;
    const Vector diag = ops.w.array() * (1.0 / dt + react.array());
    A += SpMat(diag.asDiagonal());
    Vector rhs = ops.w.array() * (prev.array() / dt + supply.array());
    if (extra) rhs += *extra;
    return solve_linear(A, rhs, true);
}

bool step_chemicals(const SimplicialMesh& mesh, const MeshOperators& ops, const ModelParams& p,
                    const SimulationState& prev, double dt, Vector& n_new, Vector& c_new,
                    Vector& a_new) {
    const Eigen::Index n = mesh.n_nodes();
    Vector react(n), supply(n);

    for (Eigen::Index j = 0; j < n; ++j) {
        const ReactionSplit rs = nutrient_split(prev.phi_v[j], prev.phi_d[j], prev.phi_a[j],
                                                ops.irc_node[j], ops.lnv_node[j], p);
        react[j] = rs.react;
        supply[j] = rs.supply;
    }
    n_new = solve_reaction_diffusion(mesh, ops, TensorField::D, p.b_n, dt, prev.n, react, supply);

    for (Eigen::Index j = 0; j < n; ++j) {
        const ReactionSplit rs = taf_split(prev.phi_v[j], prev.phi_a[j], n_new[j], p);
        react[j] = rs.react;
        supply[j] = rs.supply;
    }
    c_new = solve_reaction_diffusion(mesh, ops, TensorField::D, p.b_c, dt, prev.c, react, supply);

    // Vasculature: implicit diffusion, explicit growth, chemotactic drift up the
    // TAF gradient with the old phi_a as weight. The drift is assembled in
    // upwinded flux form: within each cell, every vertex donates its own
    // vasculature to the downwind vertices (gamma_j > 0 means the drift points
    // toward vertex j). The plain Galerkin form drains nodes whose own phi_a
    // is zero, which no amount of dt halving can repair; the upwind form keeps
    // the drain proportional to the donor value, is mass conservative by
    // pairwise transfer, and turns positivity into a dt CFL condition.
    Vector extra = Vector::Zero(n);
    const int nv = mesh.dim() + 1;
    for (Eigen::Index k = 0; k < mesh.n_cells(); ++k) {
        const CellGeometry& g = mesh.cell_geometry(k);
        SmallVec grad_c = SmallVec::Zero(mesh.dim());
        for (int v = 0; v < nv; ++v) grad_c += c_new[mesh.cells()(k, v)] * g.grads.col(v);
        const SmallVec tgc = mesh.tensor_T(k) * grad_c;
        const double scale = p.h_a * g.measure / nv;
        for (int j = 0; j < nv; ++j) {
            const double gamma = scale * g.grads.col(j).dot(tgc);
            if (gamma <= 0.0) continue;
            const Eigen::Index node_j = mesh.cells()(k, j);
            for (int i = 0; i < nv; ++i) {
                if (i == j) continue;
                const double sent = gamma * prev.phi_a[mesh.cells()(k, i)];
                extra[node_j] += sent;
                extra[mesh.cells()(k, i)] -= sent;
            }
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        react[j] = 0.0;
        supply[j] = source_angio(prev.phi_v[j], prev.phi_d[j], prev.phi_a[j], c_new[j],
                                 ops.irc_node[j], p);
    }
    a_new = solve_reaction_diffusion(mesh, ops, TensorField::T, p.L_a_inv, dt, prev.phi_a, react,
                                     supply, &extra);

    const double slack = 1e-12;
    auto in_box = [&](const Vector& f) {
        return f.minCoeff() >= -slack && f.maxCoeff() <= 1.0 + slack;
    };
    if (!in_box(n_new) || !in_box(c_new) || !in_box(a_new)) return false;
    n_new = n_new.cwiseMax(0.0).cwiseMin(1.0);
    c_new = c_new.cwiseMax(0.0).cwiseMin(1.0);
    a_new = a_new.cwiseMax(0.0).cwiseMin(1.0);
    return true;
}

Vector step_forcing(const MeshOperators& ops, const ModelParams& p, double mu, const Vector& phi_k,
                    const Vector& phi_T_k, const Vector& sigma_k, const Vector& phi_T_prev) {
    const Vector grad_part = (ops.K_I * phi_T_k).cwiseQuotient(ops.w);
    Vector psi2(phi_T_prev.size());
    for (Eigen::Index j = 0; j < psi2.size(); ++j)
        psi2[j] = psi2_prime(phi_T_prev[j], p.phi_bar);
    return phi_k - mu * (p.Pi * p.eps * p.eps * grad_part + p.Pi * psi2 - sigma_k);
}

double project_node(double z, double phi_other, double mu_pi, double phi_bar, double omega,
                    double tol, int max_inner) {
    const double gap = 1.0 - phi_other;
    if (gap <= 1e-12) throw StepReject("projection: barrier saturated, phi_other >= 1");
    const double a = mu_pi * (1.0 - phi_bar);
    auto residual = [&](double phi) { return phi + a / (gap - phi) - z; };
    if (residual(0.0) >= 0.0) return 0.0;

    // Root of the strictly increasing residual in (0, gap). Damped Newton with a
    // bisection bracket as safeguard; a fixed omega reproduces the plain
    // projected-gradient map up to the safeguard.
    double lo = 0.0, hi = gap;
    double phi = std::min(std::max(z - a / gap, 0.0), 0.5 * gap);
    for (int it = 0; it < max_inner; ++it) {
        const double g = residual(phi);
        if (g == 0.0) return phi;
        if (g < 0.0)
            lo = phi;
        else
            hi = phi;
        double om = omega;
        if (om <= 0.0) {
            const double d = gap - phi;
            om = std::clamp(1.0 / (1.0 + a / (d * d)), 1e-3, 1.0);
        }
        double next = phi - om * g;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - phi) < tol) return next;
        phi = next;
    }
    throw StepReject("projection: no convergence within the iteration cap");
}

Vector project_nodewise(const Vector& z, const Vector& phi_other_k,
                        const std::vector<std::uint8_t>& passive, const Vector& passive_value,
                        double mu_pi, double phi_bar, double omega, double tol, int max_inner) {
    Vector out(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j)
        out[j] = passive[j] ? passive_value[j]
                            : project_node(z[j], phi_other_k[j], mu_pi, phi_bar, omega, tol,
                                           max_inner);
    return out;
}

struct CoupledStep::Impl {
    Eigen::Index N = 0;
    double L_v = 0, L_d = 0;
    Vector w;
    const SpMat* K_T = nullptr;
    SpMat K_bv, K_bd;          // mobility-weighted T stiffness (defect correction)
    Vector r1c_v, r1c_d;       // k-independent part of the first/third equations
    Vector mp2;                // mu Pi psi2'(phi_T_prev)
    std::unique_ptr<SparseOperator> op;
};

CoupledStep::CoupledStep(const SimplicialMesh& mesh, const MeshOperators& ops,
                         const ModelParams& p, const SimulationState& prev, const Vector& n_new,
                         double dt, double mu, double k_t)
    : impl_(std::make_unique<Impl>()) {
    const Eigen::Index N = mesh.n_nodes();
    impl_->N = N;
    impl_->L_v = p.L_v;
    impl_->L_d = p.L_d;
    impl_->w = ops.w;
    impl_->K_T = &ops.K_T;

    Vector bhat_v(N), bhat_d(N), src_v(N), src_d(N);
    for (Eigen::Index j = 0; j < N; ++j) {
        const double pv = prev.phi_v[j], pd = prev.phi_d[j], pa = prev.phi_a[j];
        bhat_v[j] = mobility_hat(pv, pv + pd, pa);
        bhat_d[j] = mobility_hat(pd, pv + pd, pa);
        src_v[j] = source_viable(pv, pd, pa, n_new[j], k_t, p);
        src_d[j] = source_necrotic(pv, pd, n_new[j], k_t, p);
    }
    impl_->K_bv = assemble_stiffness(mesh, TensorField::T, &bhat_v);
    impl_->K_bd = assemble_stiffness(mesh, TensorField::T, &bhat_d);
    const SpMat K_chemo = assemble_stiffness(mesh, TensorField::T, &bhat_v, &ops.hv_cell);

    impl_->r1c_v = (ops.w.array() * (prev.phi_v.array() / dt + src_v.array())).matrix() +
                   K_chemo * n_new;
    impl_->r1c_d = (ops.w.array() * (prev.phi_d.array() / dt + src_d.array())).matrix();

    impl_->mp2.resize(N);
    for (Eigen::Index j = 0; j < N; ++j)
        impl_->mp2[j] = mu * p.Pi * psi2_prime(prev.phi_v[j] + prev.phi_d[j], p.phi_bar);

    // Block system in [phi_v, Sigma_v, phi_d, Sigma_d]:
    //   (1/dt) W phi_v                + (1/L_v) K_T Sigma_v                          = r0
    //   (W + me K_I) phi_v - mu W Sigma_v + me K_I phi_d                             = r1
    //                                   (1/dt) W phi_d      + (1/L_d) K_T Sigma_d   = r2
    //   me K_I phi_v                  + (W + me K_I) phi_d  - mu W Sigma_d          = r3
    // with me = mu Pi eps^2.
    const double me = mu * p.Pi * p.eps * p.eps;
    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(4 * N + 2 * ops.K_T.nonZeros() + 4 * ops.K_I.nonZeros()));
    for (Eigen::Index j = 0; j < N; ++j) {
        trips.emplace_back(j, j, ops.w[j] / dt);
        trips.emplace_back(N + j, j, ops.w[j]);
        trips.emplace_back(N + j, N + j, -mu * ops.w[j]);
        trips.emplace_back(2 * N + j, 2 * N + j, ops.w[j] / dt);
        trips.emplace_back(3 * N + j, 2 * N + j, ops.w[j]);
        trips.emplace_back(3 * N + j, 3 * N + j, -mu * ops.w[j]);
    }
    for (Eigen::Index col = 0; col < N; ++col) {
        for (SpMat::InnerIterator it(ops.K_T, col); it; ++it) {
            trips.emplace_back(it.row(), N + it.col(), it.value() / p.L_v);
            trips.emplace_back(2 * N + it.row(), 3 * N + it.col(), it.value() / p.L_d);
        }
        for (SpMat::InnerIterator it(ops.K_I, col); it; ++it) {
            const double v = me * it.value();
            trips.emplace_back(N + it.row(), it.col(), v);
            trips.emplace_back(N + it.row(), 2 * N + it.col(), v);
            trips.emplace_back(3 * N + it.row(), it.col(), v);
            trips.emplace_back(3 * N + it.row(), 2 * N + it.col(), v);
        }
    }
    SpMat A(4 * N, 4 * N);
    A.setFromTriplets(trips.begin(), trips.end());
    impl_->op = std::make_unique<SparseOperator>(std::move(A), false);
}

CoupledStep::~CoupledStep() = default;
CoupledStep::CoupledStep(CoupledStep&&) noexcept = default;

const SpMat& CoupledStep::matrix() const { return impl_->op->matrix(); }

CoupledStep::Iterate CoupledStep::solve(const Vector& z_v, const Vector& z_d,
                                        const Vector& phi_v_half, const Vector& phi_d_half,
                                        const Vector& sigma_v_k, const Vector& sigma_d_k) const {
    const Eigen::Index N = impl_->N;
    Vector rhs(4 * N);
    rhs.segment(0, N) =
        impl_->r1c_v + (*impl_->K_T * sigma_v_k - impl_->K_bv * sigma_v_k) / impl_->L_v;
    rhs.segment(N, N) =
        (impl_->w.array() * (2.0 * phi_v_half - z_v - impl_->mp2).array()).matrix();
    rhs.segment(2 * N, N) =
        impl_->r1c_d + (*impl_->K_T * sigma_d_k - impl_->K_bd * sigma_d_k) / impl_->L_d;
    rhs.segment(3 * N, N) =
        (impl_->w.array() * (2.0 * phi_d_half - z_d - impl_->mp2).array()).matrix();

    const Vector x = impl_->op->solve(rhs);
    Iterate out;
    out.phi_v = x.segment(0, N);
    out.sigma_v = x.segment(N, N);
    out.phi_d = x.segment(2 * N, N);
    out.sigma_d = x.segment(3 * N, N);
    return out;
}

Matrix cell_velocity(const SimplicialMesh& mesh, const ModelParams& p, const SimulationState& s) {
    const int dim = mesh.dim();
    Matrix v = Matrix::Zero(mesh.n_cells(), dim);
    SmallVec grad_n(dim), grad_sv(dim);
    for (Eigen::Index k = 0; k < mesh.n_cells(); ++k) {
        const CellGeometry& g = mesh.cell_geometry(k);
        grad_n.setZero();
        grad_sv.setZero();
        double bprime = 0.0;
        for (int a = 0; a <= dim; ++a) {
            const int j = mesh.cells()(k, a);
            grad_n += s.n[j] * g.grads.col(a);
            grad_sv += s.sigma_v[j] * g.grads.col(a);
            const double solid = 1.0 - s.phi_v[j] - s.phi_d[j];
            const double va = 1.0 + s.phi_a[j];
            bprime += solid * solid / (va * va);
        }
        bprime /= dim + 1;
        const double hv = p.h_v * (mesh.tissue(k) == kWM ? p.wm_factor : 1.0);
        v.row(k) = (bprime * (mesh.tensor_T(k) * (hv * grad_n - grad_sv / p.L_v))).transpose();
    }
    return v;
}

double adaptive_dt(const SimplicialMesh& mesh, const ModelParams& p, const SimulationState& s) {
    const double base = 100.0 * p.L_v * p.eps * p.eps / p.Pi;
    const Matrix vc = cell_velocity(mesh, p, s);
    Matrix vn = Matrix::Zero(mesh.n_nodes(), mesh.dim());
    Vector vol = Vector::Zero(mesh.n_nodes());
    for (Eigen::Index k = 0; k < mesh.n_cells(); ++k) {
        const double m = mesh.cell_geometry(k).measure;
        for (int a = 0; a <= mesh.dim(); ++a) {
            vn.row(mesh.cells()(k, a)) += m * vc.row(k);
            vol[mesh.cells()(k, a)] += m;
        }
    }
    double v_max = 0.0;
    for (Eigen::Index j = 0; j < mesh.n_nodes(); ++j)
        v_max = std::max(v_max, vn.row(j).cwiseAbs().sum() / vol[j]);
    if (v_max <= 0.0) return base;
    return std::min(base, mesh.h_min() / (2.0 * v_max));
}

namespace {

// One attempt at the given dt; throws StepReject when the attempt must be
// retried with a smaller step.
AdvanceReport attempt_step(const SimplicialMesh& mesh, const MeshOperators& ops,
                           const ModelParams& p, const ActiveSets& sets, const StepControls& ctl,
                           double dt, double k_t, SimulationState& state) {
    Vector n_new, c_new, a_new;
    if (!step_chemicals(mesh, ops, p, state, dt, n_new, c_new, a_new))
        throw StepReject("chemical fields left [0,1]");

    const double mu = ctl.mu > 0.0 ? ctl.mu : dt;
    const double mu_pi = mu * p.Pi;
    const Vector phi_T_prev = state.phi_v + state.phi_d;

    Vector passive_value_d(state.phi_d.size());
    for (Eigen::Index j = 0; j < passive_value_d.size(); ++j)
        passive_value_d[j] =
            state.phi_d[j] + dt * (p.nu_d * state.phi_v[j] * std::max(0.0, p.delta_n - n_new[j]) +
                                   p.k1 * state.phi_v[j]);

    const CoupledStep coupled(mesh, ops, p, state, n_new, dt, mu, k_t);

    CoupledStep::Iterate cur{state.phi_v, state.sigma_v, state.phi_d, state.sigma_d};

    for (int k = 0; k < ctl.max_outer; ++k) {
        const Vector phi_T_k = cur.phi_v + cur.phi_d;
        const Vector z_v = step_forcing(ops, p, mu, cur.phi_v, phi_T_k, cur.sigma_v, phi_T_prev);
        const Vector z_d = step_forcing(ops, p, mu, cur.phi_d, phi_T_k, cur.sigma_d, phi_T_prev);
        const Vector pv = project_nodewise(z_v, cur.phi_d, sets.passive_v, state.phi_v, mu_pi,
                                           p.phi_bar, ctl.omega, ctl.proj_tol, ctl.max_inner);
        const Vector pd = project_nodewise(z_d, cur.phi_v, sets.passive_d, passive_value_d, mu_pi,
                                           p.phi_bar, ctl.omega, ctl.proj_tol, ctl.max_inner);

        CoupledStep::Iterate next = coupled.solve(z_v, z_d, pv, pd, cur.sigma_v, cur.sigma_d);
        const double lin_diff = (next.phi_v - cur.phi_v).cwiseAbs().maxCoeff() +
                                (next.phi_d - cur.phi_d).cwiseAbs().maxCoeff();
        cur = std::move(next);
        if (lin_diff >= ctl.outer_tol) continue;

        // Commit the converged linear iterate: it satisfies the discrete mass
        // balance exactly for any sigma, so the phase masses are conserved to
        // solver precision. Its negative part is the remaining distance to the
        // projection fixed point and is clamped away, which keeps the committed
        // phases exactly nonnegative.
        Vector com_v = cur.phi_v.cwiseMax(0.0);
        Vector com_d = cur.phi_d.cwiseMax(0.0);
        if ((com_v + com_d).maxCoeff() > 1.0 - 1e-10) throw StepReject("saturation at commit");
        state.phi_v = std::move(com_v);
        state.phi_d = std::move(com_d);
        state.sigma_v = std::move(cur.sigma_v);
        state.sigma_d = std::move(cur.sigma_d);
        state.phi_a = std::move(a_new);
        state.n = std::move(n_new);
        state.c = std::move(c_new);
        state.t += dt;
        state.dt = dt;
        AdvanceReport rep;
        rep.dt = dt;
        rep.outer_iters = k + 1;
        return rep;
    }
    throw StepReject("outer iteration cap reached");
}

}  // namespace

AdvanceReport advance_time_step(const SimplicialMesh& mesh, const MeshOperators& ops,
                                const ModelParams& p, const TherapySchedule& therapy,
                                const StepControls& ctl, SimulationState& state) {
    double dt = adaptive_dt(mesh, p, state) * ctl.dt_scale;
    if (ctl.dt_cap > 0.0) {
        // A cap within 5% above the proposal absorbs the step: this lets the
        // driver land exactly on t_end instead of leaving a sliver step.
        dt = ctl.dt_cap <= 1.05 * dt ? ctl.dt_cap : std::min(dt, ctl.dt_cap);
    }
    const double k_t = therapy_rate(therapy, state.t);
    const ActiveSets sets = classify_nodes(mesh, state.phi_v, state.phi_d);

    std::string last;
    for (int halv = 0; halv <= ctl.max_halvings; ++halv) {
        try {
            AdvanceReport rep = attempt_step(mesh, ops, p, sets, ctl, dt, k_t, state);
            rep.halvings = halv;
            return rep;
        } catch (const StepReject& e) {
            last = e.what();
            dt *= 0.5;
        } catch (const NumericalAbort& e) {
            last = e.what();
            dt *= 0.5;
        }
    }
    throw NumericalAbort("time step rejected after " + std::to_string(ctl.max_halvings) +
                         " halvings at t = " + std::to_string(state.t) + " (last: " + last + ")");
}

}  // namespace angio
