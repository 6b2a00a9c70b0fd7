#pragma once

#include "lcw/model.hpp"
#include "lcw/workflow.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lcw {

/// Collapses two ordered choice lists to one category per assessor, keeping
/// any coincidence between them.
std::pair<Topic, Topic> reduce_pair(std::span<const Topic> a, std::span<const Topic> b);

/// Fleiss' kappa; every item carries the same number (>= 2) of ratings.
/// Categories are those that appear. Throws DegenerateAgreement when the
/// expected agreement is 1, EmptyInput for no items.
double fleiss_kappa(std::span<const std::vector<Topic>> items);
double fleiss_kappa(std::span<const std::pair<Topic, Topic>> items);

/// Landis & Koch label: "poor", "slight", "fair", "moderate", "substantial", "almost perfect".
std::string_view landis_koch_band(double kappa) noexcept;

struct AgreementReport {
    std::optional<double> kappa;  // empty when degenerate or no items
    bool degenerate = false;
    std::vector<std::pair<Topic, Topic>> reduced_pairs;
    std::vector<Topic> category_universe;
};

/// Uses every library whose assessments are all DONE. With more than two
/// assessors the first choice of each is rated.
AgreementReport agreement(const ProjectData& project);

struct ScenarioCounts {
    std::array<std::size_t, 3> counts{};  // indexed by ScenarioKind
    std::size_t total = 0;

    std::size_t count(ScenarioKind kind) const noexcept { return counts[static_cast<std::size_t>(kind)]; }
    /// Percentage with one decimal, e.g. "57.8"; "0.0" when empty.
    std::string percent(ScenarioKind kind) const;
};

ScenarioCounts conflict_distribution(std::span<const ConflictReport> reports);

using CategoryCounts = std::array<std::size_t, kTopicCount>;

/// Rows without a final category are ignored.
CategoryCounts category_counts(std::span<const DatasetRow> rows);

/// Exact summary of CVSS scores. Reported figures are hundredths rounded
/// half-up; stdev is the population standard deviation.
struct CvssSummary {
    std::size_t n = 0;
    long min = 0, median = 0, max = 0, mean = 0, stdev = 0;  // hundredths
    double mean_exact = 0, stdev_exact = 0;

    static std::string format(long hundredths);
    bool operator==(const CvssSummary&) const = default;
};

/// Throws EmptyInput.
CvssSummary cvss_stats(std::span<const CvssScore> values);

struct CategoryCvssRow {
    Topic category;
    std::size_t libraries;
    std::optional<CvssSummary> cvss;  // absent when no NVD score is known
};

struct ClassCvssRow {
    NetworkClass cls;
    std::size_t libraries;
    std::optional<CvssSummary> cvss;  // absent when no NVD score is known
};

struct ProjectStats {
    std::size_t libraries = 0;
    std::size_t finalized = 0;
    ScenarioCounts scenarios;
    AgreementReport agreement;
    CategoryCounts categories{};
    std::vector<CategoryCvssRow> category_cvss;  // descending library count, then canonical order
    std::vector<ClassCvssRow> class_cvss;        // Remote network first
    std::size_t cves = 0;
    std::size_t cves_below_floor = 0;  // by NVD score
    CvssScore severity_floor;
};

/// Category rows use the final category; class rows use the class after revision.
ProjectStats compute_stats(const ProjectData& project);

/// Lines describing mismatches between computed class counts and reference
/// counts; empty when they agree.
std::vector<std::string> class_count_discrepancies(const ProjectStats& stats,
                                                   const std::map<NetworkClass, std::size_t>& reference);

/// Human-readable report, one fact per line.
std::string render_report(const ProjectStats& stats);

/// Chart-ready series in one CSV:
/// section,name,count,percent,min,median,max,avg,stdev,value
std::string report_csv(const ProjectStats& stats);

}  // namespace lcw
