#include "lcw/workflow.hpp"

#include "lcw/error.hpp"
#include "lcw/protocol.hpp"

#include <algorithm>
#include <array>
#include <mutex>
#include <utility>

namespace lcw {

namespace {

constexpr std::array kStateNames{"Defined",  "SourcesCollected",     "UnderAssessment", "Assessed",
                                 "UnderArbitration", "ClassRevisionPending", "Finalized"};

void check_version(const LibraryRecord& rec, std::optional<std::uint64_t> expected) {
    if (expected && *expected != rec.version)
        throw Error(ErrorCode::VersionConflict, rec.coordinate.to_string() + ": expected version " +
                                                    std::to_string(*expected) + ", current " +
                                                    std::to_string(rec.version));
}

Mutation unchanged(const LibraryRecord& rec) { return {rec.state, rec.version, false}; }

void append_comment(std::string& target, const std::string& comment) {
    if (comment.empty() || target.find(comment) != std::string::npos) return;
    target = target.empty() ? comment : target + "; " + comment;
}

}  // namespace

std::string_view to_string(WorkflowState state) noexcept { return kStateNames[static_cast<std::size_t>(state)]; }

WorkflowState parse_workflow_state(std::string_view text) {
    for (std::size_t i = 0; i < kStateNames.size(); ++i)
        if (text == kStateNames[i]) return static_cast<WorkflowState>(i);
    throw Error(ErrorCode::InvalidArgument, "unknown workflow state '" + std::string(text) + "'");
}

bool is_valid_transition(WorkflowState from, WorkflowState to) noexcept {
    using S = WorkflowState;
    switch (from) {
    case S::Defined: return to == S::SourcesCollected;
    case S::SourcesCollected: return to == S::UnderAssessment;
    case S::UnderAssessment: return to == S::Assessed;
    case S::Assessed: return to == S::UnderArbitration || to == S::ClassRevisionPending || to == S::Finalized;
    case S::UnderArbitration: return to == S::ClassRevisionPending || to == S::Finalized;
    case S::ClassRevisionPending: return to == S::Finalized;
    case S::Finalized: return false;
    }
    return false;
}

std::string_view to_string(Role role) noexcept {
    switch (role) {
    case Role::Assessor: return "assessor";
    case Role::Arbitrator: return "arbitrator";
    case Role::Coordinator: return "coordinator";
    }
    return "";
}

Role parse_role(std::string_view text) {
    if (text == "assessor") return Role::Assessor;
    if (text == "arbitrator") return Role::Arbitrator;
    if (text == "coordinator") return Role::Coordinator;
    throw Error(ErrorCode::InvalidArgument, "unknown role '" + std::string(text) + "'");
}

void transition(LibraryRecord& rec, WorkflowState to) {
    if (!is_valid_transition(rec.state, to))
        throw Error(ErrorCode::InvalidTransition, rec.coordinate.to_string() + ": cannot move from " +
                                                      std::string(to_string(rec.state)) + " to " +
                                                      std::string(to_string(to)));
    rec.state = to;
}

std::optional<NetworkClass> final_class(const LibraryRecord& rec, const ClassPartition& partition) {
    if (rec.revised_class) return rec.revised_class;
    if (rec.final_category) return partition.class_of(*rec.final_category);
    return std::nullopt;
}

const Assessment* LibraryRecord::assessment_of(std::string_view assessor_id) const noexcept {
    const auto it = std::find_if(assessments.begin(), assessments.end(),
                                 [&](const Assessment& a) { return a.assessor_id == assessor_id; });
    return it == assessments.end() ? nullptr : &*it;
}

const Actor* ProjectData::find_actor(std::string_view id) const noexcept {
    const auto it = std::find_if(actors.begin(), actors.end(), [&](const Actor& a) { return a.id == id; });
    return it == actors.end() ? nullptr : &*it;
}

const LibraryRecord* ProjectData::find_library(std::string_view coordinate) const noexcept {
    const auto it = std::find_if(libraries.begin(), libraries.end(),
                                 [&](const LibraryRecord& r) { return r.coordinate.to_string() == coordinate; });
    return it == libraries.end() ? nullptr : &*it;
}

std::vector<std::string> ProjectData::assessor_ids() const {
    std::vector<std::string> ids;
    for (const auto& a : actors)
        if (a.role == Role::Assessor) ids.push_back(a.id);
    return ids;
}

Project::Project() : Project(ProtocolConfig{}) {}

Project::Project(ProtocolConfig config) {
    config.validate();
    data_.config = std::move(config);
}

Project::Project(ProjectData data) : data_(std::move(data)) {
    data_.config.validate();
    rebuild_index();
}

Project::Project(Project&& other) : data_(other.snapshot()) { rebuild_index(); }

void Project::rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < data_.libraries.size(); ++i) {
        const auto [it, inserted] = index_.emplace(data_.libraries[i].coordinate.to_string(), i);
        if (!inserted) throw Error(ErrorCode::DuplicateCoordinate, "duplicate library " + it->first);
    }
}

ProjectData Project::snapshot() const {
    std::shared_lock lock(mutex_);
    return data_;
}

ProtocolConfig Project::config() const {
    std::shared_lock lock(mutex_);
    return data_.config;
}

std::uint64_t Project::version() const {
    std::shared_lock lock(mutex_);
    return data_.version;
}

void Project::restore(ProjectData data) {
    data.config.validate();
    std::unique_lock lock(mutex_);
    data_ = std::move(data);
    rebuild_index();
}

LibraryRecord& Project::record(const LibraryCoordinate& lib) {
    const auto it = index_.find(lib.to_string());
    if (it == index_.end()) throw Error(ErrorCode::UnknownLibrary, "unknown library " + lib.to_string());
    return data_.libraries[it->second];
}

const LibraryRecord& Project::record(const LibraryCoordinate& lib) const {
    const auto it = index_.find(lib.to_string());
    if (it == index_.end()) throw Error(ErrorCode::UnknownLibrary, "unknown library " + lib.to_string());
    return data_.libraries[it->second];
}

const Actor& Project::require_actor(std::string_view id, Role role) const {
    const Actor* a = data_.find_actor(id);
    if (!a) throw Error(ErrorCode::RoleViolation, "unknown actor '" + std::string(id) + "'");
    if (a->role != role)
        throw Error(ErrorCode::RoleViolation, "actor '" + a->id + "' is " + std::string(to_string(a->role)) +
                                                  ", operation requires " + std::string(to_string(role)));
    return *a;
}

Mutation Project::commit(LibraryRecord& rec) {
    ++rec.version;
    ++data_.version;
    return {rec.state, rec.version, true};
}

void Project::add_actor(const Actor& actor) {
    if (actor.id.empty()) throw Error(ErrorCode::InvalidArgument, "actor id must not be empty");
    std::unique_lock lock(mutex_);
    if (const Actor* existing = data_.find_actor(actor.id)) {
        if (existing->role == actor.role) return;
        throw Error(ErrorCode::RoleViolation, "actor '" + actor.id + "' already holds role " +
                                                  std::string(to_string(existing->role)));
    }
    if (actor.role == Role::Assessor &&
        data_.assessor_ids().size() >= static_cast<std::size_t>(data_.config.assessors))
        throw Error(ErrorCode::InvalidArgument,
                    "project already has " + std::to_string(data_.config.assessors) + " assessors");
    data_.actors.push_back(actor);
    ++data_.version;
}

Actor Project::actor(std::string_view id) const {
    std::shared_lock lock(mutex_);
    const Actor* a = data_.find_actor(id);
    if (!a) throw Error(ErrorCode::InvalidArgument, "unknown actor '" + std::string(id) + "'");
    return *a;
}

void Project::add_library(const LibraryCoordinate& coordinate) { add_libraries({coordinate}); }

void Project::add_libraries(const std::vector<LibraryCoordinate>& coordinates) {
    std::unique_lock lock(mutex_);
    std::map<std::string, std::size_t, std::less<>> seen;
    for (const auto& c : coordinates) {
        const std::string key = c.to_string();
        if (index_.contains(key) || !seen.emplace(key, 0).second)
            throw Error(ErrorCode::DuplicateCoordinate, "duplicate library " + key);
    }
    for (const auto& c : coordinates) {
        index_.emplace(c.to_string(), data_.libraries.size());
        LibraryRecord rec;
        rec.coordinate = c;
        data_.libraries.push_back(std::move(rec));
    }
    ++data_.version;
}

Mutation Project::set_sources(const LibraryCoordinate& lib, const SourceSet& sources) {
    validate(sources);
    std::unique_lock lock(mutex_);
    LibraryRecord& rec = record(lib);
    if (rec.state != WorkflowState::Defined && rec.sources == sources) return unchanged(rec);
    rec.sources = sources;
    if (rec.state == WorkflowState::Defined) transition(rec, WorkflowState::SourcesCollected);
    return commit(rec);
}

Mutation Project::set_vulnerabilities(const LibraryCoordinate& lib, std::vector<VulnerabilityRecord> records) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!is_valid_cve_id(records[i].cve_id))
            throw Error(ErrorCode::InvalidArgument, "malformed CVE id '" + records[i].cve_id + "'");
        for (std::size_t j = 0; j < i; ++j)
            if (records[j].cve_id == records[i].cve_id)
                throw Error(ErrorCode::DuplicateCve, lib.to_string() + ": duplicate " + records[i].cve_id);
    }
    std::unique_lock lock(mutex_);
    LibraryRecord& rec = record(lib);
    if (rec.vulnerabilities == records) return unchanged(rec);
    if (rec.state == WorkflowState::ClassRevisionPending || rec.state == WorkflowState::Finalized)
        throw Error(ErrorCode::AlreadyFinalized, lib.to_string() + ": category already final");
    rec.vulnerabilities = std::move(records);
    return commit(rec);
}

Mutation Project::set_comment(const LibraryCoordinate& lib, const std::string& comment) {
    std::unique_lock lock(mutex_);
    LibraryRecord& rec = record(lib);
    if (rec.comment == comment) return unchanged(rec);
    rec.comment = comment;
    return commit(rec);
}

LibraryRecord Project::library(const LibraryCoordinate& lib) const {
    std::shared_lock lock(mutex_);
    return record(lib);
}

namespace {

// Called once the category is fixed: marks Local + AV:N libraries for revision.
void settle_category(LibraryRecord& rec, const ProtocolConfig& cfg) {
    rec.revision_marked = needs_class_revision(cfg.partition.class_of(*rec.final_category), rec.vulnerabilities);
    transition(rec, rec.revision_marked ? WorkflowState::ClassRevisionPending : WorkflowState::Finalized);
}

}  // namespace

Mutation Project::submit_assessment(std::string_view actor_id, const LibraryCoordinate& lib, const Assessment& a,
                                    std::optional<std::uint64_t> expected_version) {
    std::unique_lock lock(mutex_);
    require_actor(actor_id, Role::Assessor);
    const ProtocolConfig& cfg = data_.config;
    validate_choices(a.choices, cfg);
    LibraryRecord& rec = record(lib);

    Assessment entry = a;
    entry.assessor_id = std::string(actor_id);
    const Assessment* previous = rec.assessment_of(actor_id);
    if (previous && *previous == entry) return unchanged(rec);
    if (previous && previous->done)
        throw Error(rec.state >= WorkflowState::Assessed ? ErrorCode::AlreadyFinalized : ErrorCode::AssessmentFrozen,
                    lib.to_string() + ": assessment by '" + entry.assessor_id + "' is already DONE");
    if (rec.state > WorkflowState::UnderAssessment)
        throw Error(ErrorCode::AlreadyFinalized, lib.to_string() + ": assessment phase is over");
    if (rec.state == WorkflowState::Defined)
        throw Error(ErrorCode::InvalidTransition, lib.to_string() + ": sources not collected yet");
    const auto assessors = data_.assessor_ids();
    const bool has_arbitrator = std::any_of(data_.actors.begin(), data_.actors.end(),
                                            [](const Actor& x) { return x.role == Role::Arbitrator; });
    if (assessors.size() < static_cast<std::size_t>(cfg.assessors) || !has_arbitrator)
        throw Error(ErrorCode::InsufficientActors, "assessment needs " + std::to_string(cfg.assessors) +
                                                       " assessors and at least one arbitrator");
    check_version(rec, expected_version);

    if (rec.state == WorkflowState::SourcesCollected) transition(rec, WorkflowState::UnderAssessment);
    auto slot = std::find_if(rec.assessments.begin(), rec.assessments.end(),
                             [&](const Assessment& x) { return x.assessor_id == entry.assessor_id; });
    if (slot != rec.assessments.end())
        *slot = entry;
    else
        rec.assessments.push_back(entry);

    const bool all_done = std::all_of(assessors.begin(), assessors.end(), [&](const std::string& id) {
        const Assessment* x = rec.assessment_of(id);
        return x && x->done;
    });
    if (all_done) {
        AssessmentMatrix matrix{rec.coordinate, {}};
        for (const auto& id : assessors) matrix.entries.push_back(rec.assessment_of(id)->choices);
        rec.report = analyze(matrix, cfg);
        transition(rec, WorkflowState::Assessed);
        if (rec.report->scenario.kind == ScenarioKind::AutoFinal) {
            rec.final_category = finalize(rec.report->scenario, std::nullopt);
            settle_category(rec, cfg);
        }
    }
    return commit(rec);
}

std::vector<Assessment> Project::visible_assessments(std::string_view actor_id, const LibraryCoordinate& lib) const {
    std::shared_lock lock(mutex_);
    const Actor* actor = data_.find_actor(actor_id);
    if (!actor) throw Error(ErrorCode::RoleViolation, "unknown actor '" + std::string(actor_id) + "'");
    const LibraryRecord& rec = record(lib);
    std::vector<Assessment> out;
    switch (actor->role) {
    case Role::Assessor:
        if (const Assessment* own = rec.assessment_of(actor_id)) out.push_back(*own);
        break;
    case Role::Arbitrator:
        out = rec.assessments;
        break;
    case Role::Coordinator:
        out = rec.assessments;
        if (rec.state < WorkflowState::Assessed)
            for (auto& a : out) {
                a.choices.clear();
                a.comment.clear();
            }
        break;
    }
    return out;
}

std::vector<QueueItem> Project::arbitration_queue(std::string_view actor_id) const {
    std::shared_lock lock(mutex_);
    require_actor(actor_id, Role::Arbitrator);
    std::vector<QueueItem> out;
    for (const auto& rec : data_.libraries) {
        const bool open = rec.state == WorkflowState::Assessed && rec.report &&
                          rec.report->scenario.kind != ScenarioKind::AutoFinal;
        const bool mine = rec.state == WorkflowState::UnderArbitration && rec.arbitration_owner == actor_id;
        if (open || mine)
            out.push_back({rec.coordinate, *rec.report, rec.arbitration_owner, rec.assessments, rec.version});
    }
    return out;
}

Mutation Project::claim(std::string_view actor_id, const LibraryCoordinate& lib,
                        std::optional<std::uint64_t> expected_version) {
    std::unique_lock lock(mutex_);
    require_actor(actor_id, Role::Arbitrator);
    LibraryRecord& rec = record(lib);
    if (rec.state == WorkflowState::UnderArbitration && rec.arbitration_owner == actor_id) return unchanged(rec);
    if (rec.state != WorkflowState::Assessed || !rec.report ||
        rec.report->scenario.kind == ScenarioKind::AutoFinal)
        throw Error(ErrorCode::NotQueueOwner, lib.to_string() + ": not open for arbitration");
    check_version(rec, expected_version);
    rec.arbitration_owner = std::string(actor_id);
    transition(rec, WorkflowState::UnderArbitration);
    return commit(rec);
}

Mutation Project::submit_arbitration(std::string_view actor_id, const LibraryCoordinate& lib, Topic choice,
                                     const std::string& comment, std::optional<std::uint64_t> expected_version) {
    std::unique_lock lock(mutex_);
    require_actor(actor_id, Role::Arbitrator);
    LibraryRecord& rec = record(lib);
    const ArbitrationRecord entry{std::string(actor_id), choice, comment};
    if (rec.arbitration && *rec.arbitration == entry) return unchanged(rec);

    const bool queued = rec.state == WorkflowState::Assessed && rec.report &&
                        rec.report->scenario.kind != ScenarioKind::AutoFinal && !rec.arbitration_owner;
    const bool owned = rec.state == WorkflowState::UnderArbitration && rec.arbitration_owner == actor_id;
    if (!queued && !owned) {
        if (rec.state == WorkflowState::UnderArbitration)
            throw Error(ErrorCode::NotQueueOwner, lib.to_string() + ": claimed by another arbitrator");
        if (rec.state > WorkflowState::UnderArbitration && rec.arbitration)
            throw Error(ErrorCode::AlreadyFinalized, lib.to_string() + ": already arbitrated");
        throw Error(ErrorCode::NotQueueOwner, lib.to_string() + ": not in the arbitration queue");
    }
    check_version(rec, expected_version);
    const Topic final_category = finalize(rec.report->scenario, choice);
    if (queued) {
        rec.arbitration_owner = std::string(actor_id);
        transition(rec, WorkflowState::UnderArbitration);
    }
    rec.arbitration = entry;
    rec.final_category = final_category;
    rec.comment = comment;
    settle_category(rec, data_.config);
    return commit(rec);
}

std::vector<RevisionItem> Project::revision_queue(std::string_view actor_id) const {
    std::shared_lock lock(mutex_);
    require_actor(actor_id, Role::Arbitrator);
    std::vector<RevisionItem> out;
    for (const auto& rec : data_.libraries)
        if (rec.state == WorkflowState::ClassRevisionPending)
            out.push_back({rec.coordinate, *rec.final_category, rec.vulnerabilities, rec.version});
    return out;
}

Mutation Project::submit_revision(std::string_view actor_id, const LibraryCoordinate& lib, RevisionDecision decision,
                                  const std::string& comment, std::optional<std::uint64_t> expected_version) {
    std::unique_lock lock(mutex_);
    require_actor(actor_id, Role::Arbitrator);
    LibraryRecord& rec = record(lib);
    const RevisionRecord entry{std::string(actor_id), decision, comment};
    if (rec.revision && *rec.revision == entry) return unchanged(rec);
    if (!rec.revision_marked)
        throw Error(ErrorCode::RevisionWithoutMark, lib.to_string() + ": not marked for class revision");
    if (rec.state != WorkflowState::ClassRevisionPending)
        throw Error(ErrorCode::AlreadyFinalized, lib.to_string() + ": class revision already decided");
    check_version(rec, expected_version);
    const NetworkClass current = data_.config.partition.class_of(*rec.final_category);
    rec.revised_class = revise_class(current, decision, comment, rec.revision_marked);
    rec.revision = entry;
    append_comment(rec.comment, comment);
    transition(rec, WorkflowState::Finalized);
    return commit(rec);
}

}  // namespace lcw
