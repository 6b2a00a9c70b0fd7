#include "lcw/store.hpp"

#include "lcw/error.hpp"
#include "lcw/protocol.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace lcw {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchema = 1;

template <typename T, typename Fn>
json optional_json(const std::optional<T>& value, Fn&& fn) {
    return value ? fn(*value) : json(nullptr);
}

json topics_json(const std::vector<Topic>& topics) {
    json out = json::array();
    for (const Topic t : topics) out.push_back(std::string(name_of(t)));
    return out;
}

std::vector<Topic> topics_from(const json& j) {
    std::vector<Topic> out;
    for (const auto& t : j) out.push_back(parse_topic(t.get<std::string>()));
    return out;
}

std::optional<std::string> opt_string(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
}

json to_json(const ProtocolConfig& c) {
    return {{"assessors", c.assessors},
            {"max_choices", c.max_choices},
            {"threshold", to_fraction_string(c.threshold)},
            {"severity_floor", c.severity_floor.to_string()},
            {"remote_topics", topics_json(c.partition.remote_topics())}};
}

ProtocolConfig config_from(const json& j) {
    ProtocolConfig c;
    c.assessors = j.at("assessors").get<int>();
    c.max_choices = j.at("max_choices").get<int>();
    c.threshold = parse_fraction(j.at("threshold").get<std::string>());
    c.severity_floor = CvssScore::parse(j.at("severity_floor").get<std::string>());
    const auto remote = topics_from(j.at("remote_topics"));
    c.partition = ClassPartition::with_remote(remote);
    return c;
}

json to_json(const VulnerabilityRecord& v) {
    auto score = [](const CvssScore& s) { return json(s.to_string()); };
    return {{"cve_id", v.cve_id},
            {"cvss_selection", optional_json(v.cvss_selection, score)},
            {"cvss_nvd", optional_json(v.cvss_nvd, score)},
            {"attack_vector", optional_json(v.attack_vector, [](AttackVector av) { return json(to_string(av)); })},
            {"affected_version", optional_json(v.affected_version, [](const std::string& s) { return json(s); })}};
}

VulnerabilityRecord vulnerability_from(const json& j) {
    VulnerabilityRecord v;
    v.cve_id = j.at("cve_id").get<std::string>();
    if (auto s = opt_string(j, "cvss_selection")) v.cvss_selection = CvssScore::parse(*s);
    if (auto s = opt_string(j, "cvss_nvd")) v.cvss_nvd = CvssScore::parse(*s);
    if (auto s = opt_string(j, "attack_vector")) v.attack_vector = parse_attack_vector(*s);
    v.affected_version = opt_string(j, "affected_version");
    return v;
}

json to_json(const ConflictReport& r) {
    return {{"choices", r.choices},
            {"matches", r.matches},
            {"conflict", to_fraction_string(r.conflict)},
            {"ambiguous", r.ambiguous},
            {"scenario", std::string(to_string(r.scenario.kind))},
            {"candidates", topics_json(r.scenario.candidates)}};
}

ScenarioKind scenario_kind_from(const std::string& s) {
    for (const auto k : {ScenarioKind::AutoFinal, ScenarioKind::ChooseOne, ScenarioKind::ChooseFromUnion})
        if (to_string(k) == s) return k;
    throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + s + "'");
}

ConflictReport report_from(const json& j) {
    ConflictReport r;
    r.choices = j.at("choices").get<int>();
    r.matches = j.at("matches").get<int>();
    r.conflict = parse_fraction(j.at("conflict").get<std::string>());
    r.ambiguous = j.at("ambiguous").get<bool>();
    r.scenario.kind = scenario_kind_from(j.at("scenario").get<std::string>());
    r.scenario.candidates = topics_from(j.at("candidates"));
    return r;
}

json to_json(const LibraryRecord& rec) {
    json assessments = json::array();
    for (const auto& a : rec.assessments)
        assessments.push_back(
            {{"assessor_id", a.assessor_id}, {"choices", topics_json(a.choices)}, {"done", a.done}, {"comment", a.comment}});
    json vulns = json::array();
    for (const auto& v : rec.vulnerabilities) vulns.push_back(to_json(v));
    auto str = [](const std::string& s) { return json(s); };
    const auto& src = rec.sources;
    return {
        {"ecosystem", rec.coordinate.ecosystem},
        {"coordinate", rec.coordinate.to_string()},
        {"state", std::string(to_string(rec.state))},
        {"version", rec.version},
        {"sources",
         {{"registry_entry", optional_json(src.registry_entry, str)},
          {"repository", optional_json(src.repository, str)},
          {"website", optional_json(src.website, str)},
          {"wiki_doc", optional_json(src.wiki_doc, str)}}},
        {"vulnerabilities", vulns},
        {"assessments", assessments},
        {"report", optional_json(rec.report, [](const ConflictReport& r) { return to_json(r); })},
        {"arbitration_owner", optional_json(rec.arbitration_owner, str)},
        {"arbitration", optional_json(rec.arbitration,
                                      [](const ArbitrationRecord& a) {
                                          return json{{"arbitrator_id", a.arbitrator_id},
                                                      {"category", std::string(name_of(a.final_category))},
                                                      {"comment", a.comment}};
                                      })},
        {"final_category", optional_json(rec.final_category, [](Topic t) { return json(std::string(name_of(t))); })},
        {"revision_marked", rec.revision_marked},
        {"revision", optional_json(rec.revision,
                                   [](const RevisionRecord& r) {
                                       return json{{"arbitrator_id", r.arbitrator_id},
                                                   {"decision", std::string(to_string(r.decision))},
                                                   {"comment", r.comment}};
                                   })},
        {"revised_class",
         optional_json(rec.revised_class, [](NetworkClass c) { return json(std::string(to_string(c))); })},
        {"comment", rec.comment},
    };
}

LibraryRecord library_from(const json& j) {
    LibraryRecord rec;
    rec.coordinate = parse_coordinate(j.at("coordinate").get<std::string>(), j.at("ecosystem").get<std::string>());
    rec.state = parse_workflow_state(j.at("state").get<std::string>());
    rec.version = j.at("version").get<std::uint64_t>();
    const json& src = j.at("sources");
    rec.sources = {opt_string(src, "registry_entry"), opt_string(src, "repository"), opt_string(src, "website"),
                   opt_string(src, "wiki_doc")};
    for (const auto& v : j.at("vulnerabilities")) rec.vulnerabilities.push_back(vulnerability_from(v));
    for (const auto& a : j.at("assessments"))
        rec.assessments.push_back({a.at("assessor_id").get<std::string>(), topics_from(a.at("choices")),
                                   a.at("done").get<bool>(), a.at("comment").get<std::string>()});
    if (!j.at("report").is_null()) rec.report = report_from(j["report"]);
    rec.arbitration_owner = opt_string(j, "arbitration_owner");
    if (const json& a = j.at("arbitration"); !a.is_null())
        rec.arbitration = ArbitrationRecord{a.at("arbitrator_id").get<std::string>(),
                                            parse_topic(a.at("category").get<std::string>()),
                                            a.at("comment").get<std::string>()};
    if (auto t = opt_string(j, "final_category")) rec.final_category = parse_topic(*t);
    rec.revision_marked = j.at("revision_marked").get<bool>();
    if (const json& r = j.at("revision"); !r.is_null())
        rec.revision = RevisionRecord{r.at("arbitrator_id").get<std::string>(),
                                      parse_revision_decision(r.at("decision").get<std::string>()),
                                      r.at("comment").get<std::string>()};
    if (auto c = opt_string(j, "revised_class")) rec.revised_class = parse_network_class(*c);
    rec.comment = j.at("comment").get<std::string>();
    return rec;
}

std::uint64_t read_version(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    const json doc = json::parse(text.str(), nullptr, false);
    if (doc.is_discarded() || !doc.contains("version"))
        throw Error(ErrorCode::CorruptSnapshot, path.string() + ": cannot read version of existing snapshot");
    return doc["version"].get<std::uint64_t>();
}

class FileLock {
public:
    explicit FileLock(const fs::path& path) : fd_(::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644)) {
        if (fd_ < 0) throw Error(ErrorCode::IoError, "cannot open lock file " + path.string());
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw Error(ErrorCode::IoError, "cannot lock " + path.string());
        }
    }
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_;
};

}  // namespace

std::string snapshot_to_json(const ProjectData& data) {
    json actors = json::array();
    for (const auto& a : data.actors) actors.push_back({{"id", a.id}, {"role", std::string(to_string(a.role))}});
    json libraries = json::array();
    for (const auto& rec : data.libraries) libraries.push_back(to_json(rec));
    const json doc = {{"schema", kSchema},
                      {"version", data.version},
                      {"config", to_json(data.config)},
                      {"actors", actors},
                      {"libraries", libraries}};
    return doc.dump(1) + "\n";
}

ProjectData snapshot_from_json(const std::string& text) {
    ProjectData data;
    try {
        const json doc = json::parse(text);
        if (doc.at("schema").get<int>() != kSchema) throw Error(ErrorCode::CorruptSnapshot, "unsupported schema");
        data.version = doc.at("version").get<std::uint64_t>();
        data.config = config_from(doc.at("config"));
        for (const auto& a : doc.at("actors"))
            data.actors.push_back({a.at("id").get<std::string>(), parse_role(a.at("role").get<std::string>())});
        for (const auto& l : doc.at("libraries")) data.libraries.push_back(library_from(l));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptSnapshot, std::string("snapshot does not parse: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CorruptSnapshot) throw;
        throw Error(ErrorCode::CorruptSnapshot, std::string("snapshot holds an invalid value: ") + e.what());
    }
    validate_snapshot(data);
    return data;
}

void validate_snapshot(const ProjectData& data) {
    auto corrupt = [](const std::string& what) { return Error(ErrorCode::CorruptSnapshot, what); };
    try {
        data.config.validate();
    } catch (const Error& e) {
        throw corrupt(e.what());
    }
    std::set<std::string> ids;
    for (const auto& a : data.actors)
        if (a.id.empty() || !ids.insert(a.id).second) throw corrupt("duplicate or empty actor id '" + a.id + "'");
    const auto assessors = data.assessor_ids();
    if (assessors.size() > static_cast<std::size_t>(data.config.assessors)) throw corrupt("too many assessors");

    std::set<std::string> coords;
    std::uint64_t version_floor = 0;
    for (const auto& rec : data.libraries) {
        const std::string name = rec.coordinate.to_string();
        auto bad = [&](const std::string& what) { return corrupt(name + ": " + what); };
        if (!coords.insert(name).second) throw bad("duplicate library");
        version_floor += rec.version;
        try {
            validate(rec.sources);
        } catch (const Error& e) {
            throw bad(e.what());
        }
        std::set<std::string> cves;
        for (const auto& v : rec.vulnerabilities)
            if (!is_valid_cve_id(v.cve_id) || !cves.insert(v.cve_id).second) throw bad("bad or duplicate CVE " + v.cve_id);

        std::set<std::string> seen;
        for (const auto& a : rec.assessments) {
            const Actor* actor = data.find_actor(a.assessor_id);
            if (!actor || actor->role != Role::Assessor) throw bad("assessment by non-assessor " + a.assessor_id);
            if (!seen.insert(a.assessor_id).second) throw bad("two assessments by " + a.assessor_id);
            try {
                validate_choices(a.choices, data.config);
            } catch (const Error& e) {
                throw bad(e.what());
            }
        }

        const bool assessed = rec.state >= WorkflowState::Assessed;
        if (rec.state == WorkflowState::Defined && !rec.assessments.empty()) throw bad("assessments before sources");
        if (assessed != rec.report.has_value()) throw bad("conflict report does not match state");
        if (rec.report) {
            AssessmentMatrix m{rec.coordinate, {}};
            for (const auto& id : assessors) {
                const Assessment* a = rec.assessment_of(id);
                if (!a || !a->done) throw bad("assessed without every DONE mark");
                m.entries.push_back(a->choices);
            }
            if (analyze(m, data.config) != *rec.report) throw bad("stored conflict report differs from assessments");
        }
        const bool has_final = rec.state >= WorkflowState::ClassRevisionPending;
        if (has_final != rec.final_category.has_value()) throw bad("final category does not match state");
        if (rec.final_category) {
            if (rec.report->scenario.kind == ScenarioKind::AutoFinal) {
                if (rec.arbitration || *rec.final_category != rec.report->scenario.candidates.front())
                    throw bad("AutoFinal library with a different category");
            } else if (!rec.arbitration || rec.arbitration->final_category != *rec.final_category ||
                       std::find(rec.report->scenario.candidates.begin(), rec.report->scenario.candidates.end(),
                                 *rec.final_category) == rec.report->scenario.candidates.end()) {
                throw bad("arbitrated category outside the candidates");
            }
            const bool marked = needs_class_revision(data.config.partition.class_of(*rec.final_category), rec.vulnerabilities);
            if (marked != rec.revision_marked) throw bad("revision mark does not match vulnerabilities");
        }
        if (rec.state == WorkflowState::ClassRevisionPending && !rec.revision_marked) throw bad("pending revision without mark");
        if (rec.state == WorkflowState::UnderArbitration && !rec.arbitration_owner) throw bad("arbitration without owner");
        if (rec.revision.has_value() != rec.revised_class.has_value()) throw bad("revision without revised class");
        if (rec.revision) {
            if (!rec.revision_marked || rec.state != WorkflowState::Finalized) throw bad("revision of an unmarked library");
            const NetworkClass expected = rec.revision->decision == RevisionDecision::Escalate
                                              ? NetworkClass::RemoteNetwork
                                              : data.config.partition.class_of(*rec.final_category);
            if (*rec.revised_class != expected) throw bad("revised class does not follow the decision");
        } else if (rec.revision_marked && rec.state == WorkflowState::Finalized) {
            throw bad("marked library finalized without revision");
        }
    }
    if (data.version < version_floor) throw corrupt("project version lower than library history");
}

ProjectData load_snapshot(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return snapshot_from_json(text.str());
}

void save_snapshot(const fs::path& path, const ProjectData& data, std::optional<std::uint64_t> base_version) {
    const std::string text = snapshot_to_json(data);
    fs::path lock_path = path;
    lock_path += ".lock";
    FileLock lock(lock_path);
    if (base_version && fs::exists(path)) {
        const std::uint64_t current = read_version(path);
        if (current != *base_version)
            throw Error(ErrorCode::VersionConflict, path.string() + " is at version " + std::to_string(current) +
                                                        ", expected " + std::to_string(*base_version));
    }
    static std::atomic<unsigned> counter{0};
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    {
        const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
        if (fd < 0) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        std::size_t written = 0;
        while (written < text.size()) {
            const auto n = ::write(fd, text.data() + written, text.size() - written);
            if (n <= 0) {
                ::close(fd);
                fs::remove(tmp);
                throw Error(ErrorCode::IoError, "short write to " + tmp.string());
            }
            written += static_cast<std::size_t>(n);
        }
        ::fsync(fd);
        ::close(fd);
    }
    fs::rename(tmp, path);
}

}  // namespace lcw
