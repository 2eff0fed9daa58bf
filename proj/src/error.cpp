#include "chainforge/error.hpp"

namespace chainforge {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NotCoprime: return "NotCoprime";
    case ErrorKind::ModulusMismatch: return "ModulusMismatch";
    case ErrorKind::SearchBudgetExceeded: return "SearchBudgetExceeded";
    case ErrorKind::EndpointMismatch: return "EndpointMismatch";
    case ErrorKind::WeightOutOfRange: return "WeightOutOfRange";
    case ErrorKind::ParameterInconsistency: return "ParameterInconsistency";
    case ErrorKind::AxiomMissing: return "AxiomMissing";
    case ErrorKind::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorKind::ExponentOutOfRange: return "ExponentOutOfRange";
    case ErrorKind::NonDecreasingWeight: return "NonDecreasingWeight";
    case ErrorKind::UnsafeLink: return "UnsafeLink";
    case ErrorKind::ForbiddenCharacteristic: return "ForbiddenCharacteristic";
    case ErrorKind::MgdViolation: return "MgdViolation";
    case ErrorKind::BadWeightClass: return "BadWeightClass";
    case ErrorKind::NothingToStrip: return "NothingToStrip";
    case ErrorKind::WeightClassViolation: return "WeightClassViolation";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::Undecided: return "Undecided";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::MissingHeckeData: return "MissingHeckeData";
    case ErrorKind::ValidationFailed: return "ValidationFailed";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::UsageError: return "UsageError";
    }
    return "Unknown";
}

}  // namespace chainforge
