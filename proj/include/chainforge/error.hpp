#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chainforge {

enum class ErrorKind {
    NotCoprime,
    ModulusMismatch,
    SearchBudgetExceeded,
    EndpointMismatch,
    WeightOutOfRange,
    ParameterInconsistency,
    AxiomMissing,
    UnsupportedOrder,
    ExponentOutOfRange,
    NonDecreasingWeight,
    UnsafeLink,
    ForbiddenCharacteristic,
    MgdViolation,
    BadWeightClass,
    NothingToStrip,
    WeightClassViolation,
    PreconditionFailed,
    Undecided,
    ParseError,
    InvariantViolation,
    MissingHeckeData,
    ValidationFailed,
    IoError,
    UsageError,
};

std::string_view to_string(ErrorKind kind);

/// Every engine failure is reported through this type; `kind()` is stable
/// and is what tests and the CLI dispatch on.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace chainforge
