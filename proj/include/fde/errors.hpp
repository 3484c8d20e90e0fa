#pragma once

#include <stdexcept>
#include <string>

namespace fde {

// Iterative solver or Newton loop failed to meet its tolerance. Carries the
// state of the last iterate so callers can report diagnostics.
class SolverError : public std::runtime_error {
public:
    SolverError(std::string what, std::string solver, long long iterations, double residual)
        : std::runtime_error(std::move(what)),
          solver_name(std::move(solver)),
          iterations(iterations),
          residual(residual) {}

    std::string solver_name;
    long long iterations;
    double residual;
};

// Malformed or contradictory experiment configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::string what, int line = 0, std::string field = {})
        : std::runtime_error(std::move(what)), line(line), field(std::move(field)) {}

    int line;
    std::string field;
};

} // namespace fde
