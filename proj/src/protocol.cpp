#include "lcw/protocol.hpp"

#include "lcw/error.hpp"

#include <algorithm>

namespace lcw {

namespace {

struct SetStats {
    int choices = 0;
    TopicMask common;
    TopicMask all;
};

SetStats collect(const AssessmentMatrix& ass) {
    if (ass.entries.size() < 2)
        throw Error(ErrorCode::InvalidArgument, ass.library.to_string() + ": at least two assessors required");
    SetStats s;
    s.common.set();
    for (const auto& entry : ass.entries) {
        if (entry.empty()) throw Error(ErrorCode::EmptyEntry, ass.library.to_string() + ": empty assessment");
        const TopicMask m = mask_of(entry);
        s.choices += static_cast<int>(m.count());
        s.common &= m;
        s.all |= m;
    }
    return s;
}

Rational conflict_of(const SetStats& s, std::size_t k) {
    const auto matches = static_cast<std::int64_t>(s.common.count());
    return Rational(s.choices - static_cast<std::int64_t>(k) * matches, s.choices);
}

Scenario scenario_of(const SetStats& s, bool ambiguous, const AssessmentMatrix& ass) {
    if (ambiguous) return {ScenarioKind::ChooseFromUnion, topics_in(s.all)};
    switch (s.common.count()) {
    case 0:
        throw Error(ErrorCode::InconsistentState,
                    ass.library.to_string() + ": not ambiguous but assessors share no category");
    case 1: return {ScenarioKind::AutoFinal, topics_in(s.common)};
    default: return {ScenarioKind::ChooseOne, topics_in(s.common)};
    }
}

}  // namespace

Rational compute_conflict(const AssessmentMatrix& ass) {
    return conflict_of(collect(ass), ass.entries.size());
}

bool is_ambiguous(const Rational& conflict, const ProtocolConfig& cfg) {
    return conflict > cfg.threshold;
}

Scenario derive_scenario(const AssessmentMatrix& ass, const ProtocolConfig& cfg) {
    return analyze(ass, cfg).scenario;
}

ConflictReport analyze(const AssessmentMatrix& ass, const ProtocolConfig& cfg) {
    const SetStats s = collect(ass);
    ConflictReport r;
    r.choices = s.choices;
    r.matches = static_cast<int>(s.common.count());
    r.conflict = conflict_of(s, ass.entries.size());
    r.ambiguous = is_ambiguous(r.conflict, cfg);
    r.scenario = scenario_of(s, r.ambiguous, ass);
    return r;
}

void validate_choices(std::span<const Topic> choices, const ProtocolConfig& cfg) {
    if (choices.empty()) throw Error(ErrorCode::EmptyEntry, "an assessment needs at least one category");
    if (choices.size() > static_cast<std::size_t>(cfg.max_choices))
        throw Error(ErrorCode::TooManyChoices, "at most " + std::to_string(cfg.max_choices) + " categories allowed, got " +
                                                   std::to_string(choices.size()));
    if (mask_of(choices).count() != choices.size())
        throw Error(ErrorCode::InvalidArgument, "duplicate category in assessment");
}

Topic finalize(const Scenario& scenario, std::optional<Topic> arbitrator_choice) {
    if (scenario.kind == ScenarioKind::AutoFinal) {
        if (scenario.candidates.size() != 1)
            throw Error(ErrorCode::InconsistentState, "AutoFinal scenario without a single category");
        return scenario.candidates.front();
    }
    if (!arbitrator_choice) throw Error(ErrorCode::InvalidArgument, "arbitration requires a category");
    if (std::find(scenario.candidates.begin(), scenario.candidates.end(), *arbitrator_choice) ==
        scenario.candidates.end())
        throw Error(ErrorCode::ChoiceOutsideCandidates,
                    std::string(name_of(*arbitrator_choice)) + " was not chosen by any assessor");
    return *arbitrator_choice;
}

bool needs_class_revision(NetworkClass final_class, std::span<const VulnerabilityRecord> vulns) noexcept {
    return final_class == NetworkClass::Local && has_network_vector(vulns);
}

NetworkClass revise_class(NetworkClass current, RevisionDecision decision, std::string_view comment, bool marked) {
    if (!marked) throw Error(ErrorCode::RevisionWithoutMark, "library is not marked for class revision");
    if (comment.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw Error(ErrorCode::InvalidArgument, "class revision needs a comment");
    return decision == RevisionDecision::Escalate ? NetworkClass::RemoteNetwork : current;
}

}  // namespace lcw
