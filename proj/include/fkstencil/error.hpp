#pragma once

#include <stdexcept>
#include <string>

namespace fkstencil {

enum class ErrorKind {
    invalid_grid,
    out_of_domain,
    invalid_correlation,
    degenerate_diffusion,
    transform_unavailable,
    invalid_hitting_time,
    precondition,
    step_too_large,
    assumption_violation,
    configuration,
    numerical_failure,
    io,
    registration,
    invalid_argument,
};

constexpr const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::invalid_grid: return "invalid-grid";
    case ErrorKind::out_of_domain: return "out-of-domain";
    case ErrorKind::invalid_correlation: return "invalid-correlation";
    case ErrorKind::degenerate_diffusion: return "degenerate-diffusion";
    case ErrorKind::transform_unavailable: return "transform-unavailable";
    case ErrorKind::invalid_hitting_time: return "invalid-hitting-time";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::step_too_large: return "step-too-large";
    case ErrorKind::assumption_violation: return "assumption-violation";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::numerical_failure: return "numerical-failure";
    case ErrorKind::io: return "io";
    case ErrorKind::registration: return "registration";
    case ErrorKind::invalid_argument: return "invalid-argument";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace fkstencil
