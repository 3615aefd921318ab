#pragma once

#include <stdexcept>
#include <string>

namespace fucik {

/// Invalid configuration or arguments. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative solver failed to converge or hit a degenerate state.
/// Maps to CLI exit code 3.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fucik
