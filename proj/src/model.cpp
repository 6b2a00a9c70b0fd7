#include "lcw/model.hpp"

#include "lcw/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace lcw {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool has_space(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

LibraryCoordinate parse_coordinate(std::string_view line, std::string_view ecosystem) {
    const std::string_view text = trim(line);
    const auto colon = text.find(':');
    if (colon == std::string_view::npos || text.find(':', colon + 1) != std::string_view::npos)
        throw Error(ErrorCode::MalformedCoordinate, "expected exactly one ':' in '" + std::string(line) + "'");
    const std::string_view group = trim(text.substr(0, colon));
    const std::string_view artifact = trim(text.substr(colon + 1));
    if (group.empty() || artifact.empty() || has_space(group) || has_space(artifact))
        throw Error(ErrorCode::MalformedCoordinate, "empty or blank segment in '" + std::string(line) + "'");
    return LibraryCoordinate{std::string(ecosystem), std::string(group), std::string(artifact)};
}

CvssScore CvssScore::from_tenths(int tenths) {
    if (tenths < 0 || tenths > 100)
        throw Error(ErrorCode::InvalidArgument, "CVSS score out of range: " + std::to_string(tenths / 10.0));
    return CvssScore(tenths);
}

CvssScore CvssScore::from_double(double value) {
    if (!std::isfinite(value)) throw Error(ErrorCode::InvalidArgument, "CVSS score is not finite");
    return from_tenths(static_cast<int>(std::lround(value * 10.0)));
}

CvssScore CvssScore::parse(std::string_view text) {
    const std::string_view t = trim(text);
    const auto dot = t.find('.');
    const std::string_view whole = t.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : t.substr(dot + 1);
    auto bad = [&] { return Error(ErrorCode::InvalidArgument, "malformed CVSS score '" + std::string(text) + "'"); };
    if (whole.empty() || frac.size() > 1 || (dot != std::string_view::npos && frac.empty())) throw bad();
    int w = 0;
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
    if (ec != std::errc{} || p != whole.data() + whole.size()) throw bad();
    int f = 0;
    if (!frac.empty()) {
        if (!std::isdigit(static_cast<unsigned char>(frac[0]))) throw bad();
        f = frac[0] - '0';
    }
    return from_tenths(w * 10 + f);
}

std::string CvssScore::to_string() const {
    return std::to_string(tenths_ / 10) + "." + std::to_string(tenths_ % 10);
}

std::string_view to_string(AttackVector av) noexcept {
    switch (av) {
    case AttackVector::Network: return "NETWORK";
    case AttackVector::AdjacentNetwork: return "ADJACENT_NETWORK";
    case AttackVector::Local: return "LOCAL";
    case AttackVector::Physical: return "PHYSICAL";
    }
    return "";
}

AttackVector parse_attack_vector(std::string_view text) {
    const std::string_view t = trim(text);
    if (t == "NETWORK") return AttackVector::Network;
    if (t == "ADJACENT_NETWORK" || t == "ADJACENT") return AttackVector::AdjacentNetwork;
    if (t == "LOCAL") return AttackVector::Local;
    if (t == "PHYSICAL") return AttackVector::Physical;
    throw Error(ErrorCode::InvalidArgument, "unknown attack vector '" + std::string(text) + "'");
}

bool is_valid_cve_id(std::string_view id) noexcept {
    // CVE-YYYY-NNNN with four or more sequence digits
    if (id.size() < 13 || !id.starts_with("CVE-") || id[8] != '-') return false;
    auto digits = [](std::string_view s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
    };
    return digits(id.substr(4, 4)) && id.size() - 9 >= 4 && digits(id.substr(9));
}

bool has_network_vector(std::span<const VulnerabilityRecord> records) noexcept {
    return std::any_of(records.begin(), records.end(),
                       [](const VulnerabilityRecord& r) { return r.attack_vector == AttackVector::Network; });
}

std::size_t SourceSet::present_count() const noexcept {
    return static_cast<std::size_t>(registry_entry.has_value()) + repository.has_value() + website.has_value() +
           wiki_doc.has_value();
}

bool is_valid_url(std::string_view url) noexcept {
    std::string_view rest;
    if (url.starts_with("https://"))
        rest = url.substr(8);
    else if (url.starts_with("http://"))
        rest = url.substr(7);
    else
        return false;
    if (has_space(url)) return false;
    const auto host_end = rest.find_first_of("/?#");
    const std::string_view authority = rest.substr(0, host_end);
    const std::string_view host = authority.substr(0, authority.find(':'));
    if (host.empty()) return false;
    return std::all_of(host.begin(), host.end(), [](unsigned char c) {
        return std::isalnum(c) != 0 || c == '.' || c == '-' || c == '_';
    });
}

void validate(const SourceSet& sources) {
    for (const auto* link : {&sources.registry_entry, &sources.repository, &sources.website, &sources.wiki_doc}) {
        if (link->has_value() && !is_valid_url(**link))
            throw Error(ErrorCode::InvalidUrl, "not a public http(s) link: '" + **link + "'");
    }
}

std::string_view to_string(ScenarioKind kind) noexcept {
    switch (kind) {
    case ScenarioKind::AutoFinal: return "AutoFinal";
    case ScenarioKind::ChooseOne: return "ChooseOne";
    case ScenarioKind::ChooseFromUnion: return "ChooseFromUnion";
    }
    return "";
}

std::string_view to_string(RevisionDecision decision) noexcept {
    return decision == RevisionDecision::Keep ? "KEEP" : "ESCALATE";
}

RevisionDecision parse_revision_decision(std::string_view text) {
    const std::string_view t = trim(text);
    if (t == "KEEP" || t == "keep") return RevisionDecision::Keep;
    if (t == "ESCALATE" || t == "escalate") return RevisionDecision::Escalate;
    throw Error(ErrorCode::InvalidArgument, "revision decision must be KEEP or ESCALATE, got '" + std::string(text) + "'");
}

void ProtocolConfig::validate() const {
    if (assessors < 2) throw Error(ErrorCode::InvalidArgument, "at least two assessors are required");
    if (max_choices < 1) throw Error(ErrorCode::InvalidArgument, "max choices must be at least 1");
    if (threshold < 0 || threshold >= 1) throw Error(ErrorCode::InvalidArgument, "threshold must lie in [0,1)");
}

void DatasetRow::validate() const {
    auto fail = [&](const std::string& what) {
        return Error(ErrorCode::InconsistentState, coordinate.to_string() + ": " + what);
    };
    if (coincident && arbitrated) throw fail("both coincident and arbitrated categories set");
    if (final_category) {
        if (!coincident && !arbitrated) throw fail("final category without a source column");
        if (final_category != (coincident ? coincident : arbitrated)) throw fail("final category mismatch");
        if (!category_class) throw fail("missing class of final category");
    } else if (coincident || arbitrated) {
        throw fail("category set but not final");
    }
    if (revision && !final_category) throw fail("revision without final category");
    if (revised_class && category_class && *revised_class != *category_class &&
        !(revision == RevisionDecision::Escalate && *revised_class == NetworkClass::RemoteNetwork))
        throw fail("revised class differs from category class without escalation");
}

std::vector<LibraryCoordinate> filter_by_severity(std::span<const LibraryVulnerabilities> libs, CvssScore floor) {
    std::vector<LibraryCoordinate> kept;
    for (const auto& lib : libs) {
        const bool severe = std::any_of(lib.records.begin(), lib.records.end(), [&](const VulnerabilityRecord& r) {
            return r.cvss_selection && *r.cvss_selection >= floor;
        });
        if (severe) kept.push_back(lib.library);
    }
    return kept;
}

}  // namespace lcw
