#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "angio/cases.hpp"
#include "angio/config.hpp"
#include "angio/diagnostics.hpp"
#include "angio/driver.hpp"
#include "angio/errors.hpp"
#include "angio/mesh.hpp"
#include "angio/vtk.hpp"

namespace {

std::vector<double> parse_point(const std::string& text) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t comma = std::min(text.find(',', pos), text.size());
        const std::string tok = text.substr(pos, comma - pos);
        try {
            size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw angio::ConfigError("bad coordinate '" + tok + "' in '" + text + "'");
        }
        pos = comma + 1;
    }
    if (out.size() < 2 || out.size() > 3)
        throw angio::ConfigError("expected x,y or x,y,z, got '" + text + "'");
    return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, double t_end) {
    angio::RunConfig cfg = angio::parse_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (t_end > 0) cfg.t_end = t_end;
    const angio::RunResult res = angio::run(cfg);
    std::printf("completed %ld steps to t = %.9g day, outputs in %s\n", res.steps, res.t,
                cfg.out_dir.c_str());
    return 0;
}

int cmd_gen_case(const std::string& kind, int dim, double h, const std::string& out_dir,
                 unsigned long seed) {
    angio::RunConfig cfg;
    if (kind == "sphere")
        cfg.kind = angio::CaseKind::Sphere;
    else if (kind == "resection")
        cfg.kind = angio::CaseKind::Resection;
    else
        throw angio::ConfigError("unknown case '" + kind + "' (sphere or resection)");
    cfg.dim = dim;
    cfg.h = h;
    cfg.seed = seed;
    cfg.out_dir = out_dir;

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw angio::IoError("cannot create output directory: " + out_dir);

    const angio::CaseSetup setup = angio::generate_case(cfg);
    angio::save_mesh(setup.mesh, out_dir + "/mesh.txt");
    angio::write_vtk(out_dir + "/initial.vtk", setup.mesh, setup.state);
    angio::write_config_echo(cfg, out_dir + "/config.cfg");
    std::printf("%s case: %ld nodes, %ld cells, files in %s\n", kind.c_str(),
                (long)setup.mesh.n_nodes(), (long)setup.mesh.n_cells(), out_dir.c_str());
    return 0;
}

int cmd_probe(const std::string& state_path, const std::string& from_text,
              const std::string& to_text, int samples) {
    const angio::VtkState vs = angio::read_vtk(state_path);
    const std::vector<double> from = parse_point(from_text);
    const std::vector<double> to = parse_point(to_text);
    if ((int)from.size() != vs.dim || (int)to.size() != vs.dim)
        throw angio::ConfigError("probe endpoints must match the state dimension");

    // Probing needs geometry only; tensors and labels are irrelevant here.
    const angio::SmallMat eye = angio::SmallMat::Identity(vs.dim, vs.dim);
    const Eigen::Index nc = vs.cells.rows();
    angio::SimplicialMesh mesh(vs.dim, vs.nodes, vs.cells,
                               std::vector<angio::SmallMat>(nc, eye),
                               std::vector<angio::SmallMat>(nc, eye),
                               std::vector<int>(nc, angio::kGM),
                               angio::Vector::Ones(nc));

    angio::SmallVec a(vs.dim), b(vs.dim);
    for (int d = 0; d < vs.dim; ++d) {
        a[d] = from[d];
        b[d] = to[d];
    }
    std::printf("s,phi_v,phi_d,phi_a,n,c,inside\n");
    for (const angio::ProbeSample& ps : angio::line_probe(mesh, vs.state, a, b, samples))
        std::printf("%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n", ps.s, ps.phi_v, ps.phi_d, ps.phi_a,
                    ps.n, ps.c, ps.inside ? 1 : 0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simplicial FE simulator for vascularized tumor growth"};
    app.require_subcommand(1);

    std::string config_path, out_dir, case_kind = "sphere", state_path, from_text, to_text;
    double t_end = 0.0, h = 0.5;
    int dim = 2, samples = 0;
    unsigned long seed = 0;

    CLI::App* run = app.add_subcommand("run", "advance a configured case to t_end");
    run->add_option("--config", config_path, "run configuration file")->required();
    run->add_option("--out", out_dir, "override the output directory");
    run->add_option("--t-end", t_end, "override the final time [day]");

    CLI::App* gen = app.add_subcommand("gen-case", "write mesh, initial state and config");
    gen->set_help_flag("--help", "print help");  // frees -h for the spacing option
    gen->add_option("--case", case_kind, "sphere or resection")->required();
    gen->add_option("--dim", dim, "spatial dimension, 2 or 3")->required();
    gen->add_option("--h", h, "target node spacing [mm]")->required();
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_option("--seed", seed, "random seed (resection shell)");

    CLI::App* probe = app.add_subcommand("probe", "sample a state file along a segment");
    probe->add_option("--state", state_path, "VTK state file")->required();
    probe->add_option("--from", from_text, "segment start x,y[,z]")->required();
    probe->add_option("--to", to_text, "segment end x,y[,z]")->required();
    probe->add_option("--samples", samples, "number of samples (>= 2)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(run)) return cmd_run(config_path, out_dir, t_end);
        if (app.got_subcommand(gen)) return cmd_gen_case(case_kind, dim, h, out_dir, seed);
        if (app.got_subcommand(probe)) return cmd_probe(state_path, from_text, to_text, samples);
    } catch (const angio::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const angio::NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 3;
    } catch (const angio::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
