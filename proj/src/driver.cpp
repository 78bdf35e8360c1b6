#include "angio/driver.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "angio/cases.hpp"
#include "angio/diagnostics.hpp"
#include "angio/errors.hpp"
#include "angio/vtk.hpp"

namespace angio {

namespace {

std::string snapshot_name(long step) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "state_%06ld.vtk", step);
    return buf;
}

void write_probe_csv(const std::string& path, const SimplicialMesh& mesh,
                     const SimulationState& s, const ProbeSpec& spec) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open probe file for writing: " + path);
    SmallVec from(mesh.dim()), to(mesh.dim());
    for (int d = 0; d < mesh.dim(); ++d) {
        from[d] = spec.from[d];
        to[d] = spec.to[d];
    }
    out << "s,phi_v,phi_d,phi_a,n,c,inside\n";
    char buf[256];
    for (const ProbeSample& ps : line_probe(mesh, s, from, to, spec.samples)) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n", ps.s, ps.phi_v,
                      ps.phi_d, ps.phi_a, ps.n, ps.c, ps.inside ? 1 : 0);
        out << buf;
    }
    if (!out) throw IoError("failed writing probe file: " + path);
}

}  // namespace

RunResult run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);
    const std::string dir = cfg.out_dir + "/";

    write_config_echo(cfg, dir + "config_echo.cfg");

    CaseSetup setup = generate_case(cfg);
    const SimplicialMesh& mesh = setup.mesh;
    SimulationState& state = setup.state;
    const MeshOperators ops = make_operators(mesh, cfg.params);

    std::ofstream report(dir + "report.csv");
    if (!report) throw IoError("cannot open report.csv for writing");
    report << StepReport::csv_header() << "\n";
    report << make_step_report(0, state, ops, cfg.params, AdvanceReport{}).csv_row() << "\n";
    report.flush();

    write_vtk(dir + snapshot_name(0), mesh, state);

    long step = 0;
    const double t_tol = 1e-12 * std::max(1.0, cfg.t_end);
    try {
        while (state.t < cfg.t_end - t_tol) {
            StepControls ctl = cfg.controls;
            const double remaining = cfg.t_end - state.t;
            ctl.dt_cap = ctl.dt_cap > 0 ? std::min(ctl.dt_cap, remaining) : remaining;
            const AdvanceReport adv = advance_time_step(mesh, ops, cfg.params, cfg.therapy, ctl,
                                                        state);
            ++step;
            report << make_step_report(step, state, ops, cfg.params, adv).csv_row() << "\n";
            report.flush();
            if (step % cfg.cadence == 0) write_vtk(dir + snapshot_name(step), mesh, state);
        }
    } catch (const NumericalAbort&) {
        // Leave a usable trace of the failing state next to the report.
        write_vtk(dir + "state_abort.vtk", mesh, state);
        report.flush();
        throw;
    }

    write_vtk(dir + "state_final.vtk", mesh, state);
    for (size_t i = 0; i < cfg.probes.size(); ++i)
        write_probe_csv(dir + "probe_" + std::to_string(i) + ".csv", mesh, state, cfg.probes[i]);

    RunResult res;
    res.steps = step;
    res.t = state.t;
    res.state = state;
    return res;
}

}  // namespace angio
