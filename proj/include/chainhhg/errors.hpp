#pragma once

#include <stdexcept>
#include <string>

namespace chainhhg {

/// Invalid input parameters (maps to CLI exit code 2).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative method failed to converge (exit code 3).
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Memory or other resource estimate exceeds the configured cap (exit code 3).
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A cached checkpoint does not match the requested configuration (exit code 4).
class StaleCheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace chainhhg
