#pragma once

#include "lcw/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace lcw {

enum class WorkflowState {
    Defined,
    SourcesCollected,
    UnderAssessment,
    Assessed,
    UnderArbitration,
    ClassRevisionPending,
    Finalized,
};

std::string_view to_string(WorkflowState state) noexcept;
WorkflowState parse_workflow_state(std::string_view text);

/// The protocol pipeline edges; everything else is rejected.
bool is_valid_transition(WorkflowState from, WorkflowState to) noexcept;

enum class Role { Assessor, Arbitrator, Coordinator };

std::string_view to_string(Role role) noexcept;
Role parse_role(std::string_view text);

struct Actor {
    std::string id;
    Role role = Role::Assessor;

    bool operator==(const Actor&) const = default;
};

struct LibraryRecord {
    LibraryCoordinate coordinate;
    SourceSet sources;
    std::vector<VulnerabilityRecord> vulnerabilities;
    std::vector<Assessment> assessments;  // submission order; slot order comes from the actor list
    std::optional<ConflictReport> report;
    std::optional<std::string> arbitration_owner;
    std::optional<ArbitrationRecord> arbitration;
    std::optional<Topic> final_category;
    bool revision_marked = false;
    std::optional<RevisionRecord> revision;
    std::optional<NetworkClass> revised_class;
    std::string comment;
    WorkflowState state = WorkflowState::Defined;
    std::uint64_t version = 0;

    const Assessment* assessment_of(std::string_view assessor_id) const noexcept;

    bool operator==(const LibraryRecord&) const = default;
};

struct ProjectData {
    ProtocolConfig config;
    std::vector<Actor> actors;
    std::vector<LibraryRecord> libraries;  // import order
    std::uint64_t version = 0;

    const Actor* find_actor(std::string_view id) const noexcept;
    const LibraryRecord* find_library(std::string_view coordinate) const noexcept;
    /// Assessor ids in registration order; index = sheet slot.
    std::vector<std::string> assessor_ids() const;

    bool operator==(const ProjectData&) const = default;
};

struct Mutation {
    WorkflowState state;
    std::uint64_t version;  // library version after the call
    bool changed;           // false for idempotent replays
};

struct QueueItem {
    LibraryCoordinate coordinate;
    ConflictReport report;
    std::optional<std::string> owner;
    std::vector<Assessment> assessments;
    std::uint64_t version;
};

struct RevisionItem {
    LibraryCoordinate coordinate;
    Topic final_category;
    std::vector<VulnerabilityRecord> vulnerabilities;
    std::uint64_t version;
};

/// Thread-safe project state. Every mutation bumps the library version and the
/// project version; a call carrying a stale `expected_version` fails with
/// VersionConflict. Reads return copies.
class Project {
public:
    Project();
    explicit Project(ProtocolConfig config);
    explicit Project(ProjectData data);
    Project(Project&& other);
    Project& operator=(Project&&) = delete;

    ProjectData snapshot() const;
    ProtocolConfig config() const;
    std::uint64_t version() const;

    // Coordinator setup.
    void add_actor(const Actor& actor);
    void add_library(const LibraryCoordinate& coordinate);
    void add_libraries(const std::vector<LibraryCoordinate>& coordinates);  // all or nothing
    Mutation set_sources(const LibraryCoordinate& lib, const SourceSet& sources);
    Mutation set_vulnerabilities(const LibraryCoordinate& lib, std::vector<VulnerabilityRecord> records);
    Mutation set_comment(const LibraryCoordinate& lib, const std::string& comment);

    /// Replaces the whole state; used to commit an import staged on a copy.
    void restore(ProjectData data);

    /// Throws InvalidArgument for an unknown actor id.
    Actor actor(std::string_view id) const;
    LibraryRecord library(const LibraryCoordinate& lib) const;

    Mutation submit_assessment(std::string_view actor_id, const LibraryCoordinate& lib, const Assessment& a,
                               std::optional<std::uint64_t> expected_version = std::nullopt);
    std::vector<Assessment> visible_assessments(std::string_view actor_id, const LibraryCoordinate& lib) const;

    std::vector<QueueItem> arbitration_queue(std::string_view actor_id) const;
    Mutation claim(std::string_view actor_id, const LibraryCoordinate& lib,
                   std::optional<std::uint64_t> expected_version = std::nullopt);
    Mutation submit_arbitration(std::string_view actor_id, const LibraryCoordinate& lib, Topic choice,
                                const std::string& comment,
                                std::optional<std::uint64_t> expected_version = std::nullopt);

    std::vector<RevisionItem> revision_queue(std::string_view actor_id) const;
    Mutation submit_revision(std::string_view actor_id, const LibraryCoordinate& lib, RevisionDecision decision,
                             const std::string& comment,
                             std::optional<std::uint64_t> expected_version = std::nullopt);

private:
    mutable std::shared_mutex mutex_;
    ProjectData data_;
    std::map<std::string, std::size_t, std::less<>> index_;

    void rebuild_index();
    LibraryRecord& record(const LibraryCoordinate& lib);
    const LibraryRecord& record(const LibraryCoordinate& lib) const;
    const Actor& require_actor(std::string_view id, Role role) const;
    Mutation commit(LibraryRecord& rec);
};

/// Moves `rec` to `to`, throwing InvalidTransition for an edge outside the pipeline.
void transition(LibraryRecord& rec, WorkflowState to);

/// Class after revision, falling back to the class of the final category.
std::optional<NetworkClass> final_class(const LibraryRecord& rec, const ClassPartition& partition);

}  // namespace lcw
