#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlcvp {

enum class ErrorCode {
    invalid_parameter,
    divergence_detected,
    invalid_domain,
    quadrature_failure,
    unsupported_family,
    assembly_inconsistency,
    degenerate_robin,
    shift_rejected,
    budget_exceeded,
    solver_failure,
    data_not_integrable,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_parameter: return "invalid-parameter";
        case ErrorCode::divergence_detected: return "divergence-detected";
        case ErrorCode::invalid_domain: return "invalid-domain";
        case ErrorCode::quadrature_failure: return "quadrature-failure";
        case ErrorCode::unsupported_family: return "unsupported-family";
        case ErrorCode::assembly_inconsistency: return "assembly-inconsistency";
        case ErrorCode::degenerate_robin: return "degenerate-robin";
        case ErrorCode::shift_rejected: return "shift-rejected";
        case ErrorCode::budget_exceeded: return "budget-exceeded";
        case ErrorCode::solver_failure: return "solver-failure";
        case ErrorCode::data_not_integrable: return "data-not-integrable";
    }
    return "unknown";
}

/// Every numerical failure in the library surfaces as this exception; `code()`
/// is the stable identifier the CLI reports.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace nlcvp
