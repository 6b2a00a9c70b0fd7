#pragma once

#include "lcw/workflow.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Sheet exports. Every sheet has one header row followed by one row per
// library in import order, so library i sits on sheet line i + 2.
namespace lcw {

/// Header of the arbitration sheet. K=2, N=2 gives the 20 columns A-T.
std::vector<std::string> arbitration_header(const ProtocolConfig& cfg);

std::vector<std::string> arbitration_row(const ProjectData& project, const LibraryRecord& rec);

std::string export_arbitration_sheet(const ProjectData& project);

struct CveSheets {
    std::string cves;  // libs_CVEs
    std::string av;    // libs_CVEs_AV
    std::string cvss;  // libs_CVEs_CVSS (NVD score)
};

CveSheets export_cve_sheets(const ProjectData& project);

/// Replays an arbitration sheet through the workflow of `project`, whose
/// libraries must already be listed in the same order. Derived columns are
/// checked against the replayed state; any difference is SheetMismatch with
/// the sheet line. The sheet carries no arbitrator ids, so decisions are
/// recorded for the first registered arbitrator.
void import_arbitration_sheet(Project& project, std::string_view csv_text);

/// Sheet lines (1-based) whose columns H-L differ from a recomputation out of
/// the category columns.
std::vector<std::size_t> conflict_column_mismatches(std::string_view csv_text, const ProtocolConfig& cfg);

}  // namespace lcw
