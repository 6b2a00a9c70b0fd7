#pragma once

#include "lcw/rational.hpp"
#include "lcw/taxonomy.hpp"

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lcw {

/// Ecosystem-scoped library identifier, rendered "group:artifact".
struct LibraryCoordinate {
    std::string ecosystem{"maven"};
    std::string group;
    std::string artifact;

    std::string to_string() const { return group + ":" + artifact; }

    auto operator<=>(const LibraryCoordinate&) const = default;
};

/// Splits on the single colon and trims whitespace around each segment. Case is kept.
LibraryCoordinate parse_coordinate(std::string_view line, std::string_view ecosystem = "maven");

/// CVSS base score held in tenths, so 9.8 is exactly 98.
class CvssScore {
public:
    constexpr CvssScore() = default;

    static CvssScore from_tenths(int tenths);
    static CvssScore from_double(double value);
    /// Accepts "9.8", "10", "10.0". Throws Error(InvalidArgument).
    static CvssScore parse(std::string_view text);

    constexpr int tenths() const noexcept { return tenths_; }
    constexpr double value() const noexcept { return tenths_ / 10.0; }
    std::string to_string() const;

    auto operator<=>(const CvssScore&) const = default;

private:
    constexpr explicit CvssScore(int tenths) : tenths_(tenths) {}
    int tenths_ = 0;
};

enum class AttackVector { Network, AdjacentNetwork, Local, Physical };

/// NVD spelling: "NETWORK", "ADJACENT_NETWORK", "LOCAL", "PHYSICAL".
std::string_view to_string(AttackVector av) noexcept;
/// Also accepts "ADJACENT".
AttackVector parse_attack_vector(std::string_view text);

bool is_valid_cve_id(std::string_view id) noexcept;

struct VulnerabilityRecord {
    std::string cve_id;
    std::optional<CvssScore> cvss_selection;  // score seen at selection time
    std::optional<CvssScore> cvss_nvd;        // authoritative score, used for reporting
    std::optional<AttackVector> attack_vector;
    std::optional<std::string> affected_version;

    bool operator==(const VulnerabilityRecord&) const = default;
};

bool has_network_vector(std::span<const VulnerabilityRecord> records) noexcept;

/// At most one public link per source kind; a missing source stays empty.
struct SourceSet {
    std::optional<std::string> registry_entry;
    std::optional<std::string> repository;
    std::optional<std::string> website;
    std::optional<std::string> wiki_doc;

    std::size_t present_count() const noexcept;
    bool operator==(const SourceSet&) const = default;
};

/// http/https scheme, non-empty host, no whitespace.
bool is_valid_url(std::string_view url) noexcept;
void validate(const SourceSet& sources);

struct Assessment {
    std::string assessor_id;
    std::vector<Topic> choices;  // entry order matters for pair reduction
    bool done = false;
    std::string comment;

    bool operator==(const Assessment&) const = default;
};

/// entries[i] is the category set chosen by assessor i.
struct AssessmentMatrix {
    LibraryCoordinate library;
    std::vector<std::vector<Topic>> entries;
};

enum class ScenarioKind { AutoFinal, ChooseOne, ChooseFromUnion };

std::string_view to_string(ScenarioKind kind) noexcept;

struct Scenario {
    ScenarioKind kind = ScenarioKind::AutoFinal;
    std::vector<Topic> candidates;  // canonical topic order; one element for AutoFinal

    bool operator==(const Scenario&) const = default;
};

struct ConflictReport {
    int choices = 0;  // sum of set sizes
    int matches = 0;  // size of the K-way intersection
    Rational conflict;
    bool ambiguous = false;
    Scenario scenario;

    bool operator==(const ConflictReport&) const = default;
};

enum class RevisionDecision { Keep, Escalate };

std::string_view to_string(RevisionDecision decision) noexcept;  // "KEEP" / "ESCALATE"
RevisionDecision parse_revision_decision(std::string_view text);

struct ArbitrationRecord {
    std::string arbitrator_id;
    Topic final_category{};
    std::string comment;

    bool operator==(const ArbitrationRecord&) const = default;
};

struct RevisionRecord {
    std::string arbitrator_id;
    RevisionDecision decision = RevisionDecision::Keep;
    std::string comment;

    bool operator==(const RevisionRecord&) const = default;
};

struct ProtocolConfig {
    int assessors = 2;    // K
    int max_choices = 2;  // N
    Rational threshold{1, 2};
    CvssScore severity_floor = CvssScore::from_tenths(70);
    ClassPartition partition;

    /// Throws Error(InvalidArgument) when K < 2, N < 1 or T outside [0,1).
    void validate() const;

    bool operator==(const ProtocolConfig&) const = default;
};

/// One finalized (or partially processed) library in sheet layout.
struct DatasetRow {
    LibraryCoordinate coordinate;
    std::vector<std::vector<Topic>> assessor_choices;  // one per assessor slot, empty if missing
    std::vector<bool> done;
    std::optional<ConflictReport> report;
    std::optional<Topic> coincident;
    std::optional<Topic> arbitrated;
    std::optional<Topic> final_category;
    std::optional<NetworkClass> category_class;
    bool av_network = false;
    std::optional<RevisionDecision> revision;
    std::optional<NetworkClass> revised_class;
    std::string comment;

    /// Throws Error(InconsistentState) when a column invariant is broken.
    void validate() const;
};

struct LibraryVulnerabilities {
    LibraryCoordinate library;
    std::vector<VulnerabilityRecord> records;
};

/// Keeps libraries with at least one selection score >= floor; file order.
std::vector<LibraryCoordinate> filter_by_severity(std::span<const LibraryVulnerabilities> libs, CvssScore floor);

}  // namespace lcw
