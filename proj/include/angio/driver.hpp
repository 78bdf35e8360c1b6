#pragma once

#include "angio/config.hpp"
#include "angio/scheme.hpp"

namespace angio {

struct RunResult {
    long steps = 0;
    double t = 0.0;
    SimulationState state;
};

// Full run: build the case, write the config echo, the step report CSV
// (report.csv, one row per committed step), VTK snapshots every `cadence`
// steps plus state_final.vtk, and one CSV per configured probe evaluated on
// the final state. The report is flushed row by row so an abort leaves a
// usable trace. Throws NumericalAbort / ConfigError / IoError.
RunResult run(const RunConfig& cfg);

}  // namespace angio
