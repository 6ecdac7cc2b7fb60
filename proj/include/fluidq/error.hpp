#pragma once

#include <stdexcept>
#include <string>

namespace fluidq {

// Invalid model or configuration parameters (nonpositive rates, bad probabilities, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed input data: unsorted traces, mismatched grids or horizons.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The adaptive integrator could not make progress.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t)
        : std::runtime_error(what + " at t=" + std::to_string(t)), time_(t) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

// A latency lookup fell outside the simulated horizon.
class HorizonError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

}  // namespace fluidq
