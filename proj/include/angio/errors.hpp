#pragma once

#include <stdexcept>

namespace angio {

// Error taxonomy mirrored by the CLI exit codes: configuration and input
// errors exit 2, numerical aborts exit 3, filesystem problems exit 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal signal of the time stepper: the current attempt is invalid
// (constraint violation, saturated barrier, iteration cap) and should be
// retried with half the time step. Never escapes advance_time_step except
// through the halving cap, which converts it into NumericalAbort.
struct StepReject : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace angio
