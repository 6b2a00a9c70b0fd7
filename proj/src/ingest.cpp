#include "lcw/ingest.hpp"

#include "lcw/csv.hpp"
#include "lcw/error.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lcw {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

std::optional<std::string> cell(const csv::Row& row, std::size_t index) {
    const std::string_view v = trim(csv::field(row, index));
    if (v.empty()) return std::nullopt;
    return std::string(v);
}

// Rethrows with the row's line number attached.
template <typename Fn>
auto at_line(std::size_t line, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.line() != 0) throw;
        throw Error(e.code(), e.what(), line);
    }
}

struct Table {
    csv::Header header;
    std::vector<csv::Record> rows;
};

Table load_table(std::string_view text) {
    auto records = csv::parse(text);
    if (records.empty()) throw Error(ErrorCode::InvalidArgument, "missing header row", 1);
    Table t{csv::Header(records.front().fields), {}};
    t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    return t;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

bool parse_done_flag(std::string_view text) {
    const std::string_view t = trim(text);
    if (t.empty() || t == "NO" || t == "no" || t == "false" || t == "0") return false;
    if (t == "DONE" || t == "Done" || t == "done" || t == "YES" || t == "yes" || t == "true" || t == "1") return true;
    throw Error(ErrorCode::InvalidArgument, "unrecognised DONE flag '" + std::string(text) + "'");
}

std::vector<LibraryCoordinate> import_library_list(std::string_view text, std::string_view ecosystem) {
    std::vector<LibraryCoordinate> out;
    std::map<std::string, std::size_t> seen;
    std::size_t number = 0;
    std::size_t pos = 0;
    if (text.starts_with("\xEF\xBB\xBF")) pos = 3;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        const std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        ++number;
        const std::string_view t = trim(line);
        if (!t.empty() && !t.starts_with('#')) {
            auto c = at_line(number, [&] { return parse_coordinate(t, ecosystem); });
            const auto [it, inserted] = seen.emplace(c.to_string(), number);
            if (!inserted)
                throw Error(ErrorCode::DuplicateCoordinate,
                            c.to_string() + " already listed on line " + std::to_string(it->second), number);
            out.push_back(std::move(c));
        }
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return out;
}

std::vector<SourceRegistryRow> parse_sources(std::string_view csv_text) {
    const Table t = load_table(csv_text);
    const auto c = t.header.require("coordinate");
    const auto reg = t.header.require("registry_entry");
    const auto repo = t.header.require("repository");
    const auto web = t.header.require("website");
    const auto wiki = t.header.require("wiki_doc");
    std::vector<SourceRegistryRow> out;
    for (const auto& r : t.rows) {
        out.push_back(at_line(r.line, [&] {
            SourceRegistryRow row{parse_coordinate(csv::field(r.fields, c)),
                                  {cell(r.fields, reg), cell(r.fields, repo), cell(r.fields, web), cell(r.fields, wiki)}};
            validate(row.sources);
            return row;
        }));
    }
    return out;
}

std::vector<CveRow> parse_cves(std::string_view csv_text) {
    const Table t = load_table(csv_text);
    const auto c = t.header.require("coordinate");
    const auto id = t.header.require("cve_id");
    const auto score = t.header.find("selection_score");
    const auto version = t.header.find("affected_version");
    std::vector<CveRow> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : t.rows) {
        out.push_back(at_line(r.line, [&] {
            CveRow row;
            row.coordinate = parse_coordinate(csv::field(r.fields, c));
            row.record.cve_id = std::string(trim(csv::field(r.fields, id)));
            if (!is_valid_cve_id(row.record.cve_id))
                throw Error(ErrorCode::InvalidArgument, "malformed CVE id '" + row.record.cve_id + "'");
            if (score)
                if (auto s = cell(r.fields, *score)) row.record.cvss_selection = CvssScore::parse(*s);
            if (version) row.record.affected_version = cell(r.fields, *version);
            if (!seen.emplace(row.coordinate.to_string(), row.record.cve_id).second)
                throw Error(ErrorCode::DuplicateCve, row.coordinate.to_string() + ": " + row.record.cve_id + " listed twice");
            return row;
        }));
    }
    return out;
}

std::size_t import_sources(Project& project, std::string_view csv_text) {
    const auto rows = parse_sources(csv_text);
    Project staged(project.snapshot());
    const auto records = csv::parse(csv_text);
    for (std::size_t i = 0; i < rows.size(); ++i)
        at_line(records[i + 1].line, [&] { return staged.set_sources(rows[i].coordinate, rows[i].sources); });
    project.restore(staged.snapshot());
    return rows.size();
}

std::size_t import_cves(Project& project, std::string_view csv_text) {
    const auto rows = parse_cves(csv_text);
    const auto records = csv::parse(csv_text);
    std::vector<std::pair<LibraryCoordinate, std::vector<VulnerabilityRecord>>> grouped;
    std::map<std::string, std::size_t> slot;
    std::map<std::string, std::size_t> first_line;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string key = rows[i].coordinate.to_string();
        auto [it, inserted] = slot.emplace(key, grouped.size());
        if (inserted) {
            grouped.push_back({rows[i].coordinate, {}});
            first_line[key] = records[i + 1].line;
        }
        grouped[it->second].second.push_back(rows[i].record);
    }
    Project staged(project.snapshot());
    for (auto& [lib, list] : grouped) {
        at_line(first_line[lib.to_string()], [&] {
            const LibraryRecord current = staged.library(lib);
            for (auto& rec : list) {
                for (const auto& old : current.vulnerabilities) {
                    if (old.cve_id != rec.cve_id) continue;
                    rec.cvss_nvd = old.cvss_nvd;
                    rec.attack_vector = old.attack_vector;
                }
            }
            return staged.set_vulnerabilities(lib, list);
        });
    }
    project.restore(staged.snapshot());
    return rows.size();
}

std::size_t import_assessments(Project& project, std::string_view csv_text) {
    const Table t = load_table(csv_text);
    const auto c = t.header.require("coordinate");
    const auto who = t.header.require("assessor_id");
    const auto done = t.header.require("done");
    const auto comment = t.header.find("comment");
    std::vector<std::size_t> choice_columns;
    for (int i = 1;; ++i) {
        const auto col = t.header.find("choice_" + std::to_string(i));
        if (!col) break;
        choice_columns.push_back(*col);
    }
    if (choice_columns.empty()) throw Error(ErrorCode::InvalidArgument, "missing column choice_1", 1);

    Project staged(project.snapshot());
    for (const auto& r : t.rows) {
        at_line(r.line, [&] {
            Assessment a;
            a.assessor_id = std::string(trim(csv::field(r.fields, who)));
            for (const auto col : choice_columns)
                if (auto name = cell(r.fields, col)) a.choices.push_back(parse_topic(*name));
            a.done = parse_done_flag(csv::field(r.fields, done));
            if (comment) a.comment = std::string(csv::field(r.fields, *comment));
            return staged.submit_assessment(a.assessor_id, parse_coordinate(csv::field(r.fields, c)), a);
        });
    }
    project.restore(staged.snapshot());
    return t.rows.size();
}

std::size_t import_decisions(Project& project, std::string_view csv_text) {
    const Table t = load_table(csv_text);
    const auto c = t.header.require("coordinate");
    const auto who = t.header.require("arbitrator_id");
    const auto category = t.header.require("category");
    const auto revision = t.header.require("revision");
    const auto comment = t.header.find("comment");

    Project staged(project.snapshot());
    for (const auto& r : t.rows) {
        at_line(r.line, [&] {
            const LibraryCoordinate lib = parse_coordinate(csv::field(r.fields, c));
            const std::string actor(trim(csv::field(r.fields, who)));
            const std::string text = comment ? std::string(csv::field(r.fields, *comment)) : std::string();
            if (auto name = cell(r.fields, category)) staged.submit_arbitration(actor, lib, parse_topic(*name), text);
            if (auto decision = cell(r.fields, revision))
                staged.submit_revision(actor, lib, parse_revision_decision(*decision), text);
            return 0;
        });
    }
    project.restore(staged.snapshot());
    return t.rows.size();
}

}  // namespace lcw
