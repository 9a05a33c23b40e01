#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace substatic {

enum class ErrorKind {
    invalid_parameter,
    out_of_domain,
    degenerate_horizon,
    singular_quadrature,
    accuracy,
    boundary_point,
    undefined_at_critical_point,
    truncation_domain,
    truncation,
    unsupported_configuration,
    convergence,
    near_critical,
    config,
    io
};

inline std::string_view to_string(ErrorKind k)
{
    switch (k) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::out_of_domain: return "out-of-domain";
    case ErrorKind::degenerate_horizon: return "degenerate-horizon";
    case ErrorKind::singular_quadrature: return "singular-quadrature";
    case ErrorKind::accuracy: return "accuracy";
    case ErrorKind::boundary_point: return "boundary-point";
    case ErrorKind::undefined_at_critical_point: return "undefined-at-critical-point";
    case ErrorKind::truncation_domain: return "truncation-domain";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::unsupported_configuration: return "unsupported-configuration";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::near_critical: return "near-critical";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

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

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool ok, ErrorKind kind, const std::string& what)
{
    if (!ok)
        fail(kind, what);
}

} // namespace substatic
