#pragma once

#include "lcw/model.hpp"
#include "lcw/workflow.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

// File importers. Each one parses the whole input first and commits to the
// project only when every row is valid.
namespace lcw {

std::string read_text_file(const std::filesystem::path& path);

/// One coordinate per line; blank lines and '#' comments are skipped.
/// Errors carry the 1-based line number.
std::vector<LibraryCoordinate> import_library_list(std::string_view text, std::string_view ecosystem = "maven");

struct SourceRegistryRow {
    LibraryCoordinate coordinate;
    SourceSet sources;
};

/// Header: coordinate,registry_entry,repository,website,wiki_doc. Blank cells are absent sources.
std::vector<SourceRegistryRow> parse_sources(std::string_view csv_text);

struct CveRow {
    LibraryCoordinate coordinate;
    VulnerabilityRecord record;
};

/// Header: coordinate,cve_id[,selection_score][,affected_version].
std::vector<CveRow> parse_cves(std::string_view csv_text);

/// Rows per library. Libraries missing from the list are UnknownLibrary.
std::size_t import_sources(Project& project, std::string_view csv_text);
/// Replaces the vulnerability list of each listed library, keeping NVD data
/// already fetched for a CVE that stays listed.
std::size_t import_cves(Project& project, std::string_view csv_text);

/// Header: coordinate,assessor_id,choice_1..choice_N,done[,comment]; each row
/// is submitted through the workflow as that assessor.
std::size_t import_assessments(Project& project, std::string_view csv_text);

/// Header: coordinate,arbitrator_id,category,revision[,comment]. A category
/// arbitrates the library, a revision (KEEP/ESCALATE) decides its class.
std::size_t import_decisions(Project& project, std::string_view csv_text);

bool parse_done_flag(std::string_view text);

}  // namespace lcw
