// errors.hpp — Exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace nmbench {

// Invalid parameters or scenario configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

// A Matsubara frequency or the cot() pole sits too close to the Drude cutoff.
class PoleProximityError : public std::domain_error {
public:
    PoleProximityError(const std::string& what, int offending_k)
        : std::domain_error(what), k_(offending_k) {}

    int offending_k() const noexcept { return k_; }

private:
    int k_;
};

// The ODE integrator could not make progress (step-size underflow).
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double last_good_time)
        : std::runtime_error(what), last_good_time_(last_good_time) {}

    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

} // namespace nmbench
