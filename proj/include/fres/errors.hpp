#pragma once

#include <stdexcept>
#include <string>

namespace fres {

/// Invalid physical parameters or experiment description. CLI exit code 2.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure: singular solve, broken tolerance, unstable scheme. CLI exit code 3.
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Not enough data for the requested estimator. CLI exit code 4.
struct StatisticsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fres
