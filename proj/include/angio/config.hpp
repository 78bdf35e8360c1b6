#pragma once

#include <string>
#include <vector>

#include "angio/model.hpp"
#include "angio/scheme.hpp"

namespace angio {

enum class CaseKind { Sphere, Resection, Custom };

struct ProbeSpec {
    std::vector<double> from, to;
    int samples = 0;
};

// Flat key = value run configuration; '#' starts a comment, unknown keys are
// errors, an empty file reproduces the low-supply defaults. Repeated
// `radio = t0 t1 rate` / `chemo = t0 t1 rate` lines accumulate the therapy
// schedule, repeated `probe = x0 y0 [z0] x1 y1 [z1] m` lines the probes.
struct RunConfig {
    CaseKind kind = CaseKind::Sphere;
    std::string mesh_path;  // custom case only

    int dim = 2;
    double box = 20.0;            // box edge length [mm]
    double h = 0.5;               // target node spacing [mm]
    std::vector<double> center;   // sphere / resection center; empty = box middle
    double radius = 2.5;          // initial tumor / resection radius [mm]
    double phi_v0 = 0.6;          // initial viable fraction inside the sphere
    double shell_fraction = 0.3;  // seeded fraction of resection shell nodes
    double irc_width = 1.0;       // shoulder width of the resection indicator [mm]
    double wm_x0 = 0.0, wm_x1 = 0.0;  // white-matter band in x; inactive if x0 >= x1
    unsigned long seed = 0;

    double t_end = 5.0;
    int cadence = 10;  // VTK output every this many committed steps
    std::string out_dir = "out";

    ModelParams params;
    TherapySchedule therapy;
    StepControls controls;
    std::vector<ProbeSpec> probes;
};

RunConfig parse_config(const std::string& path);

// Every effective key, written so that parsing the echo reproduces the run.
void write_config_echo(const RunConfig& cfg, const std::string& path);

}  // namespace angio
