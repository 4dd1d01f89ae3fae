#pragma once

#include <stdexcept>
#include <string>

namespace fractrace {

// Parameters outside the admissible region of the inequality being evaluated.
struct regime_error : std::domain_error {
    using std::domain_error::domain_error;
};

// A numeric estimate that failed to converge (or an integral that diverges).
struct divergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incompatible or over-budget grids, bad space tags, malformed inputs.
struct grid_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace fractrace
