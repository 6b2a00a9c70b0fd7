#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lcw {

enum class ErrorCode {
    UnknownTopic,
    MalformedCoordinate,
    DuplicateCoordinate,
    UnknownLibrary,
    InvalidUrl,
    InvalidArgument,
    EmptyEntry,
    InconsistentState,
    ChoiceOutsideCandidates,
    RevisionWithoutMark,
    RoleViolation,
    TooManyChoices,
    AlreadyFinalized,
    AssessmentFrozen,
    NotQueueOwner,
    InsufficientActors,
    InvalidTransition,
    DuplicateCve,
    NotFound,
    RateLimited,
    UpstreamSchemaError,
    TransportError,
    DegenerateAgreement,
    EmptyInput,
    CorruptSnapshot,
    VersionConflict,
    SheetMismatch,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Domain error carrying a stable code. `line` is the 1-based input line for
/// file-level errors, 0 when not applicable.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::size_t line = 0);

    ErrorCode code() const noexcept { return code_; }
    std::size_t line() const noexcept { return line_; }

private:
    ErrorCode code_;
    std::size_t line_;
};

}  // namespace lcw
