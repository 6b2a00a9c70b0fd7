#include "lcw/export.hpp"

#include "lcw/csv.hpp"
#include "lcw/dataset.hpp"
#include "lcw/error.hpp"
#include "lcw/protocol.hpp"

#include <algorithm>

namespace lcw {

namespace {

struct Layout {
    std::size_t k;

    std::size_t category(std::size_t i) const { return 1 + 2 * i; }
    std::size_t alternates(std::size_t i) const { return 2 + 2 * i; }
    std::size_t done(std::size_t i) const { return 1 + 2 * k + i; }
    std::size_t base() const { return 1 + 3 * k; }
    std::size_t choices() const { return base(); }
    std::size_t matches() const { return base() + 1; }
    std::size_t conflict() const { return base() + 2; }
    std::size_t value() const { return base() + 3; }
    std::size_t ambiguous() const { return base() + 4; }
    std::size_t coincident() const { return base() + 5; }
    std::size_t arbitrated() const { return base() + 6; }
    std::size_t final_category() const { return base() + 7; }
    std::size_t cls() const { return base() + 8; }
    std::size_t av() const { return base() + 9; }
    std::size_t revision() const { return base() + 10; }
    std::size_t revised() const { return base() + 11; }
    std::size_t comment() const { return base() + 12; }
    std::size_t width() const { return base() + 13; }
};

std::string join_alternates(const std::vector<Topic>& choices) {
    std::string out;
    for (std::size_t i = 1; i < choices.size(); ++i) {
        if (i > 1) out += "; ";
        out += name_of(choices[i]);
    }
    return out;
}

std::string topic_cell(const std::optional<Topic>& t) { return t ? std::string(name_of(*t)) : std::string(); }

std::string yes_no(bool value) { return value ? "YES" : "NO"; }

std::vector<Topic> read_choices(const csv::Row& row, const Layout& l, std::size_t slot) {
    std::vector<Topic> out;
    const std::string_view first = csv::field(row, l.category(slot));
    if (!first.empty()) out.push_back(parse_topic(first));
    std::string_view rest = csv::field(row, l.alternates(slot));
    while (!rest.empty()) {
        const auto sep = rest.find("; ");
        out.push_back(parse_topic(rest.substr(0, sep)));
        rest = sep == std::string_view::npos ? std::string_view{} : rest.substr(sep + 2);
    }
    return out;
}

void fill_conflict_columns(std::vector<std::string>& row, const Layout& l, const ConflictReport& r) {
    row[l.choices()] = std::to_string(r.choices);
    row[l.matches()] = std::to_string(r.matches);
    row[l.conflict()] = to_fraction_string(r.conflict);
    row[l.value()] = to_decimal_string(r.conflict, 6);
    row[l.ambiguous()] = yes_no(r.ambiguous);
}

std::string cve_sheet(const ProjectData& project, const std::string& prefix,
                      std::string (*cell)(const VulnerabilityRecord&)) {
    std::size_t width = 0;
    for (const auto& rec : project.libraries) width = std::max(width, rec.vulnerabilities.size());
    std::string out;
    std::vector<std::string> header{"library"};
    for (std::size_t i = 1; i <= width; ++i) header.push_back(prefix + std::to_string(i));
    csv::append_row(out, header);
    for (const auto& rec : project.libraries) {
        std::vector<std::string> row(width + 1);
        row[0] = rec.coordinate.to_string();
        for (std::size_t i = 0; i < rec.vulnerabilities.size(); ++i) row[i + 1] = cell(rec.vulnerabilities[i]);
        csv::append_row(out, row);
    }
    return out;
}

}  // namespace

std::vector<std::string> arbitration_header(const ProtocolConfig& cfg) {
    const Layout l{static_cast<std::size_t>(cfg.assessors)};
    std::vector<std::string> h(l.width());
    h[0] = "library";
    for (std::size_t i = 0; i < l.k; ++i) {
        const std::string who = "assessor_" + std::to_string(i + 1);
        h[l.category(i)] = who + "_category";
        h[l.alternates(i)] = who + "_alternate";
        h[l.done(i)] = who + "_done";
    }
    h[l.choices()] = "choices";
    h[l.matches()] = "matches";
    h[l.conflict()] = "conflict";
    h[l.value()] = "conflict_value";
    h[l.ambiguous()] = "ambiguous";
    h[l.coincident()] = "coincident_category";
    h[l.arbitrated()] = "arbitrated_category";
    h[l.final_category()] = "final_category";
    h[l.cls()] = "class";
    h[l.av()] = "av_network";
    h[l.revision()] = "revision";
    h[l.revised()] = "revised_class";
    h[l.comment()] = "comment";
    return h;
}

std::vector<std::string> arbitration_row(const ProjectData& project, const LibraryRecord& rec) {
    const DatasetRow d = make_dataset_row(project, rec);
    const Layout l{static_cast<std::size_t>(project.config.assessors)};
    std::vector<std::string> row(l.width());
    row[0] = d.coordinate.to_string();
    for (std::size_t i = 0; i < l.k && i < d.assessor_choices.size(); ++i) {
        const auto& choices = d.assessor_choices[i];
        if (!choices.empty()) row[l.category(i)] = std::string(name_of(choices.front()));
        row[l.alternates(i)] = join_alternates(choices);
        row[l.done(i)] = d.done[i] ? "DONE" : "";
    }
    if (d.report) fill_conflict_columns(row, l, *d.report);
    row[l.coincident()] = topic_cell(d.coincident);
    row[l.arbitrated()] = topic_cell(d.arbitrated);
    row[l.final_category()] = topic_cell(d.final_category);
    if (d.category_class) row[l.cls()] = std::string(to_string(*d.category_class));
    row[l.av()] = yes_no(d.av_network);
    if (d.revision) row[l.revision()] = std::string(to_string(*d.revision));
    if (d.revised_class) row[l.revised()] = std::string(to_string(*d.revised_class));
    row[l.comment()] = d.comment;
    return row;
}

std::string export_arbitration_sheet(const ProjectData& project) {
    std::string out;
    csv::append_row(out, arbitration_header(project.config));
    for (const auto& rec : project.libraries) csv::append_row(out, arbitration_row(project, rec));
    return out;
}

CveSheets export_cve_sheets(const ProjectData& project) {
    return {
        cve_sheet(project, "cve_", [](const VulnerabilityRecord& v) { return v.cve_id; }),
        cve_sheet(project, "av_",
                  [](const VulnerabilityRecord& v) {
                      return v.attack_vector ? std::string(to_string(*v.attack_vector)) : std::string();
                  }),
        cve_sheet(project, "cvss_",
                  [](const VulnerabilityRecord& v) { return v.cvss_nvd ? v.cvss_nvd->to_string() : std::string(); }),
    };
}

void import_arbitration_sheet(Project& project, std::string_view csv_text) {
    const auto records = csv::parse(csv_text);
    Project staged(project.snapshot());
    const ProjectData before = staged.snapshot();
    const Layout l{static_cast<std::size_t>(before.config.assessors)};
    if (records.empty() || records.front().fields != arbitration_header(before.config))
        throw Error(ErrorCode::SheetMismatch, "header does not match the arbitration sheet layout", 1);
    if (records.size() - 1 != before.libraries.size())
        throw Error(ErrorCode::SheetMismatch, "sheet has " + std::to_string(records.size() - 1) + " rows, project has " +
                                                  std::to_string(before.libraries.size()) + " libraries");
    const auto assessors = before.assessor_ids();
    std::optional<std::string> arbitrator;
    for (const auto& a : before.actors)
        if (a.role == Role::Arbitrator) {
            arbitrator = a.id;
            break;
        }

    for (std::size_t i = 0; i < before.libraries.size(); ++i) {
        const auto& [line, row] = records[i + 1];
        try {
            if (row.size() != l.width()) throw Error(ErrorCode::SheetMismatch, "row has the wrong number of columns");
            const LibraryCoordinate& lib = before.libraries[i].coordinate;
            if (csv::field(row, 0) != lib.to_string())
                throw Error(ErrorCode::SheetMismatch, "expected library " + lib.to_string());
            for (std::size_t slot = 0; slot < l.k; ++slot) {
                Assessment a;
                a.choices = read_choices(row, l, slot);
                a.done = csv::field(row, l.done(slot)) == "DONE";
                if (a.choices.empty()) {
                    if (a.done) throw Error(ErrorCode::SheetMismatch, "DONE without categories");
                    continue;
                }
                if (slot >= assessors.size()) throw Error(ErrorCode::InsufficientActors, "not enough assessors registered");
                a.assessor_id = assessors[slot];
                staged.submit_assessment(a.assessor_id, lib, a);
            }
            const std::string comment(csv::field(row, l.comment()));
            const std::string_view arbitrated = csv::field(row, l.arbitrated());
            const std::string_view revision = csv::field(row, l.revision());
            if ((!arbitrated.empty() || !revision.empty()) && !arbitrator)
                throw Error(ErrorCode::InsufficientActors, "no arbitrator registered");
            if (!arbitrated.empty()) staged.submit_arbitration(*arbitrator, lib, parse_topic(arbitrated), comment);
            if (!revision.empty())
                staged.submit_revision(*arbitrator, lib, parse_revision_decision(revision), comment);
            staged.set_comment(lib, comment);

            const ProjectData now = staged.snapshot();
            const auto expected = arbitration_row(now, now.libraries[i]);
            for (std::size_t col = 0; col < l.width(); ++col)
                if (expected[col] != csv::field(row, col))
                    throw Error(ErrorCode::SheetMismatch, "column " + arbitration_header(now.config)[col] + " is '" +
                                                              std::string(csv::field(row, col)) + "', replay gives '" +
                                                              expected[col] + "'");
        } catch (const Error& e) {
            if (e.line() != 0) throw;
            throw Error(e.code(), e.what(), line);
        }
    }
    project.restore(staged.snapshot());
}

std::vector<std::size_t> conflict_column_mismatches(std::string_view csv_text, const ProtocolConfig& cfg) {
    const Layout l{static_cast<std::size_t>(cfg.assessors)};
    std::vector<std::size_t> bad;
    const auto records = csv::parse(csv_text);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& [line, row] = records[r];
        std::vector<std::string> expected(l.width());
        AssessmentMatrix m;
        bool complete = true;
        for (std::size_t slot = 0; slot < l.k; ++slot) {
            m.entries.push_back(read_choices(row, l, slot));
            complete = complete && csv::field(row, l.done(slot)) == "DONE" && !m.entries.back().empty();
        }
        if (complete) fill_conflict_columns(expected, l, analyze(m, cfg));
        for (std::size_t col = l.choices(); col <= l.ambiguous(); ++col)
            if (expected[col] != csv::field(row, col)) {
                bad.push_back(line);
                break;
            }
    }
    return bad;
}

}  // namespace lcw
