#pragma once

#include <stdexcept>
#include <string>

namespace bpsim {

/// Scenario file could not be parsed or failed schema checks.
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A model invariant failed (reducible chain, bad tables, ...).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The stability constraints admit no eta > 0 slackness certificate.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An iterative solver exhausted its budget without meeting its tolerance.
class NonConvergedError : public std::runtime_error {
public:
    explicit NonConvergedError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A simulation run exceeded its backlog sanity ceiling.
class RunAbortError : public std::runtime_error {
public:
    explicit RunAbortError(const std::string& msg) : std::runtime_error(msg) {}
};

// CLI exit codes; the library throws, the tool maps.
enum ExitCode {
    kExitOk = 0,
    kExitValidation = 1,
    kExitInfeasible = 2,
    kExitNonConverged = 3,
    kExitRunAbort = 4,
};

}  // namespace bpsim
