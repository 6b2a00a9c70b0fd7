#pragma once

#include "lcw/model.hpp"

#include <optional>
#include <span>
#include <string_view>

// Conflict metric, scenario derivation, finalization and class revision.
// Everything here is pure.
namespace lcw {

/// (sum |ass_i| - K * |intersection|) / sum |ass_i|, exact.
/// Throws EmptyEntry for an empty assessor set, InvalidArgument when K < 2.
Rational compute_conflict(const AssessmentMatrix& ass);

bool is_ambiguous(const Rational& conflict, const ProtocolConfig& cfg);

Scenario derive_scenario(const AssessmentMatrix& ass, const ProtocolConfig& cfg);

/// compute_conflict + is_ambiguous + derive_scenario in one pass.
ConflictReport analyze(const AssessmentMatrix& ass, const ProtocolConfig& cfg);

/// Checks |choices| against N and rejects duplicates (TooManyChoices / InvalidArgument / EmptyEntry).
void validate_choices(std::span<const Topic> choices, const ProtocolConfig& cfg);

Topic finalize(const Scenario& scenario, std::optional<Topic> arbitrator_choice);

bool needs_class_revision(NetworkClass final_class, std::span<const VulnerabilityRecord> vulns) noexcept;

/// `marked` is the outcome of needs_class_revision for the library.
NetworkClass revise_class(NetworkClass current, RevisionDecision decision, std::string_view comment, bool marked);

}  // namespace lcw
