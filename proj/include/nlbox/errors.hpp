#pragma once

#include <stdexcept>
#include <string>

namespace nlbox {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
    kSuccess = 0,
    kFailure = 1,
    kParse = 2,
    kValidation = 3,
    kConvergence = 4,
    kIo = 5,
};

/// Root of the library's exception hierarchy. Each subclass carries the exit
/// code the CLI reports when the error escapes a scenario run.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, ExitCode code = ExitCode::kFailure)
        : std::runtime_error(what), code_(code) {}

    ExitCode exit_code() const noexcept { return code_; }

private:
    ExitCode code_;
};

#define NLBOX_DEFINE_ERROR(Name, Code)                                                   \
    class Name : public Error {                                                          \
    public:                                                                              \
        explicit Name(const std::string& what) : Error(what, ExitCode::Code) {}          \
    }

// Input violates a type invariant (not Hermitian, weights do not sum to one, ...).
NLBOX_DEFINE_ERROR(ValidationError, kValidation);
// Operands with incompatible dimensions.
NLBOX_DEFINE_ERROR(ShapeError, kValidation);
// Result would exceed the configured Hilbert-space capacity.
NLBOX_DEFINE_ERROR(CapacityError, kValidation);
// Nonlinear map evaluated outside the states on which it is specified.
NLBOX_DEFINE_ERROR(DomainError, kValidation);
// Membership policy is missing a parameter its kind requires.
NLBOX_DEFINE_ERROR(ConfigurationError, kValidation);
// Ensemble does not average to the stated marginal.
NLBOX_DEFINE_ERROR(DecompositionError, kValidation);
// Conditioning on an outcome that never occurs.
NLBOX_DEFINE_ERROR(UndefinedConditionalError, kValidation);
// Input preparations of a statistics table are not tomographically complete.
NLBOX_DEFINE_ERROR(RankError, kValidation);
// An operation was called outside its precondition.
NLBOX_DEFINE_ERROR(MisuseError, kValidation);
// Scenario references an undefined label.
NLBOX_DEFINE_ERROR(ReferenceError, kValidation);
// Malformed scenario or statistics text.
NLBOX_DEFINE_ERROR(ParseError, kParse);
// Fixed-point search did not reach its tolerance.
NLBOX_DEFINE_ERROR(ConvergenceError, kConvergence);
// Filesystem failure, message includes the path.
NLBOX_DEFINE_ERROR(IoError, kIo);

#undef NLBOX_DEFINE_ERROR

}  // namespace nlbox
