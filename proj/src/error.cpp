#include "lcw/error.hpp"

namespace lcw {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::UnknownTopic: return "UnknownTopic";
    case ErrorCode::MalformedCoordinate: return "MalformedCoordinate";
    case ErrorCode::DuplicateCoordinate: return "DuplicateCoordinate";
    case ErrorCode::UnknownLibrary: return "UnknownLibrary";
    case ErrorCode::InvalidUrl: return "InvalidUrl";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyEntry: return "EmptyEntry";
    case ErrorCode::InconsistentState: return "InconsistentState";
    case ErrorCode::ChoiceOutsideCandidates: return "ChoiceOutsideCandidates";
    case ErrorCode::RevisionWithoutMark: return "RevisionWithoutMark";
    case ErrorCode::RoleViolation: return "RoleViolation";
    case ErrorCode::TooManyChoices: return "TooManyChoices";
    case ErrorCode::AlreadyFinalized: return "AlreadyFinalized";
    case ErrorCode::AssessmentFrozen: return "AssessmentFrozen";
    case ErrorCode::NotQueueOwner: return "NotQueueOwner";
    case ErrorCode::InsufficientActors: return "InsufficientActors";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::DuplicateCve: return "DuplicateCve";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::UpstreamSchemaError: return "UpstreamSchemaError";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::DegenerateAgreement: return "DegenerateAgreement";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::CorruptSnapshot: return "CorruptSnapshot";
    case ErrorCode::VersionConflict: return "VersionConflict";
    case ErrorCode::SheetMismatch: return "SheetMismatch";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message), code_(code), line_(line) {}

}  // namespace lcw
