#include "angio/diagnostics.hpp"

#include <cmath>
#include <cstdio>

#include "angio/errors.hpp"

namespace angio {

double total_mass(const Vector& w, const Vector& field) {
    if (w.size() != field.size()) throw NumericalAbort("total_mass: length mismatch");
    return (w.array() * field.array()).sum();
}

double ch_energy(const MeshOperators& ops, const ModelParams& p, const Vector& phi_T) {
    if (phi_T.maxCoeff() >= 1.0)
        throw NumericalAbort("ch_energy: phi_T reached the potential barrier");
    double bulk = 0.0;
    for (Eigen::Index j = 0; j < phi_T.size(); ++j)
        bulk += ops.w[j] * p.Pi * psi(phi_T[j], p.phi_bar);
    const double grad = 0.5 * p.Pi * p.eps * p.eps * phi_T.dot(ops.K_I * phi_T);
    return bulk + grad;
}

EnergyAddends energy_addends(const MeshOperators& ops, const ModelParams& p,
                             const SimulationState& s, const EnergyWeights& weights) {
    EnergyAddends out;
    if (weights.k_a != 0.0) {
        double e = 0.0;
        for (Eigen::Index j = 0; j < s.phi_a.size(); ++j) {
            const double a = s.phi_a[j];
            e += ops.w[j] * (a > 0.0 ? a * (std::log(a) - 1.0) : 0.0);
        }
        out.entropy_a = p.Pi * weights.k_a * e;
    }
    if (weights.d_n != 0.0) out.grad_n = 0.5 * weights.d_n * s.n.dot(ops.K_D * s.n);
    if (weights.d_c != 0.0) out.grad_c = 0.5 * weights.d_c * s.c.dot(ops.K_D * s.c);
    if (weights.chi_v != 0.0) out.chemo_v = -weights.chi_v * total_mass(ops.w, (s.n.array() * s.phi_v.array()).matrix());
    if (weights.chi_a != 0.0) out.chemo_a = -weights.chi_a * total_mass(ops.w, (s.c.array() * s.phi_a.array()).matrix());
    return out;
}

std::string StepReport::csv_header() {
    return "step,t,dt,outer_iters,halvings,mass_v,mass_d,mass_a,mass_n,mass_c,"
           "min_v,max_v,min_d,max_d,min_a,max_a,min_n,max_n,min_c,max_c,max_solid,energy";
}

std::string StepReport::csv_row() const {
    char buf[640];
    std::snprintf(buf, sizeof buf,
                  "%ld,%.9g,%.9g,%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g,"
                  "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g",
                  step, t, dt, outer_iters, halvings, mass_v, mass_d, mass_a, mass_n, mass_c,
                  min_v, max_v, min_d, max_d, min_a, max_a, min_n, max_n, min_c, max_c, max_solid,
                  energy);
    return buf;
}

StepReport make_step_report(long step, const SimulationState& s, const MeshOperators& ops,
                            const ModelParams& p, const AdvanceReport& adv) {
    StepReport r;
    r.step = step;
    r.t = s.t;
    r.dt = adv.dt;
    r.outer_iters = adv.outer_iters;
    r.halvings = adv.halvings;
    r.mass_v = total_mass(ops.w, s.phi_v);
    r.mass_d = total_mass(ops.w, s.phi_d);
    r.mass_a = total_mass(ops.w, s.phi_a);
    r.mass_n = total_mass(ops.w, s.n);
    r.mass_c = total_mass(ops.w, s.c);
    r.min_v = s.phi_v.minCoeff();
    r.max_v = s.phi_v.maxCoeff();
    r.min_d = s.phi_d.minCoeff();
    r.max_d = s.phi_d.maxCoeff();
    r.min_a = s.phi_a.minCoeff();
    r.max_a = s.phi_a.maxCoeff();
    r.min_n = s.n.minCoeff();
    r.max_n = s.n.maxCoeff();
    r.min_c = s.c.minCoeff();
    r.max_c = s.c.maxCoeff();
    r.max_solid = (s.phi_v + s.phi_d + s.phi_a).maxCoeff();
    r.energy = ch_energy(ops, p, s.phi_v + s.phi_d);
    return r;
}

ConstraintReport constraint_report(const SimulationState& s) {
    ConstraintReport r;
    r.min_v = s.phi_v.minCoeff();
    r.min_d = s.phi_d.minCoeff();
    r.max_T = (s.phi_v + s.phi_d).maxCoeff();
    r.min_a = s.phi_a.minCoeff();
    r.max_a = s.phi_a.maxCoeff();
    r.min_n = s.n.minCoeff();
    r.max_n = s.n.maxCoeff();
    r.min_c = s.c.minCoeff();
    r.max_c = s.c.maxCoeff();
    r.max_solid = (s.phi_v + s.phi_d + s.phi_a).maxCoeff();
    r.ok_positivity = r.min_v >= 0.0 && r.min_d >= 0.0;
    r.ok_saturation = r.max_T < 1.0;
    const double slack = 1e-12;
    r.ok_boxes = r.min_a >= -slack && r.max_a <= 1.0 + slack && r.min_n >= -slack &&
                 r.max_n <= 1.0 + slack && r.min_c >= -slack && r.max_c <= 1.0 + slack;
    return r;
}

std::vector<ProbeSample> line_probe(const SimplicialMesh& mesh, const SimulationState& s,
                                    const SmallVec& from, const SmallVec& to, int samples) {
    if (samples < 2) throw ConfigError("line_probe: need at least 2 samples");
    const int dim = mesh.dim();
    if (from.size() != dim || to.size() != dim)
        throw ConfigError("line_probe: endpoint dimension does not match the mesh");
    const double len = (to - from).norm();

    std::vector<ProbeSample> out(samples);
    const double slack = 1e-10;
    SmallVec x(dim), lambda(dim);
    for (int i = 0; i < samples; ++i) {
        const double a = static_cast<double>(i) / (samples - 1);
        x = (1.0 - a) * from + a * to;
        ProbeSample& ps = out[i];
        ps.s = a * len;
        for (Eigen::Index k = 0; k < mesh.n_cells() && !ps.inside; ++k) {
            const CellGeometry& g = mesh.cell_geometry(k);
            // grads.col(v) for v >= 1 are the rows of the inverse edge map, so
            // barycentric coordinates come from the same geometry data.
            double l0 = 1.0;
            bool ok = true;
            const auto x0 = mesh.nodes().row(mesh.cells()(k, 0));
            for (int v = 1; v <= dim && ok; ++v) {
                double lv = 0.0;
                for (int d = 0; d < dim; ++d) lv += g.grads(d, v) * (x[d] - x0[d]);
                lambda[v - 1] = lv;
                l0 -= lv;
                ok = lv >= -slack && lv <= 1.0 + slack;
            }
            if (!ok || l0 < -slack) continue;
            ps.inside = true;
            double bc[4];
            bc[0] = l0;
            for (int v = 1; v <= dim; ++v) bc[v] = lambda[v - 1];
            ps.phi_v = ps.phi_d = ps.phi_a = ps.n = ps.c = 0.0;
            for (int v = 0; v <= dim; ++v) {
                const int j = mesh.cells()(k, v);
                ps.phi_v += bc[v] * s.phi_v[j];
                ps.phi_d += bc[v] * s.phi_d[j];
                ps.phi_a += bc[v] * s.phi_a[j];
                ps.n += bc[v] * s.n[j];
                ps.c += bc[v] * s.c[j];
            }
        }
    }
    return out;
}

}  // namespace angio
