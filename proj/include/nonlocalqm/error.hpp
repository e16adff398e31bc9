#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nonlocalqm {

enum class ErrorKind {
    invalid_argument,
    invalid_state,
    precondition_violation,
    undefined_ratio,
    ill_posed_input,
    singularity,
    integration_failure,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid-argument";
        case ErrorKind::invalid_state: return "invalid-state";
        case ErrorKind::precondition_violation: return "precondition-violation";
        case ErrorKind::undefined_ratio: return "undefined-ratio";
        case ErrorKind::ill_posed_input: return "ill-posed-input";
        case ErrorKind::singularity: return "singularity";
        case ErrorKind::integration_failure: return "integration-failure";
    }
    return "unknown";
}

/// Error raised by every numerical operation. Carries the failing operation's
/// name so callers several layers up can report where a run went wrong.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string_view operation, const std::string& message)
        : std::runtime_error(std::string(operation) + ": " + std::string(to_string(kind)) + ": " +
                             message),
          kind_(kind),
          operation_(operation) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& operation() const noexcept { return operation_; }

private:
    ErrorKind kind_;
    std::string operation_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string_view operation, const std::string& message) {
    throw Error(kind, operation, message);
}

inline void require(bool condition, ErrorKind kind, std::string_view operation,
                    const std::string& message) {
    if (!condition) fail(kind, operation, message);
}

}  // namespace nonlocalqm
