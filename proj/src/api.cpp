#include "lcw/api.hpp"

#include "lcw/export.hpp"
#include "lcw/stats.hpp"

#include <httplib.h>
#include <json.hpp>
#include <openssl/rand.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace lcw::api {

using nlohmann::json;

namespace {

struct HttpError {
    int status;
    std::string code;
    std::string message;
};

Response json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

Response error_response(int status, std::string_view code, std::string_view message) {
    return json_response(status, {{"error", code}, {"message", message}});
}

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos < path.size()) {
        const auto next = path.find('/', pos);
        const auto part = path.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
        if (!part.empty()) parts.emplace_back(part);
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return parts;
}

std::string random_token() {
    unsigned char bytes[32];
    if (RAND_bytes(bytes, sizeof bytes) != 1) throw Error(ErrorCode::IoError, "no randomness for session token");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (const unsigned char b : bytes) {
        out += hex[b >> 4];
        out += hex[b & 0xf];
    }
    return out;
}

json parse_body(const Request& r) {
    json body = json::parse(r.body.empty() ? "{}" : r.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw HttpError{400, "BadRequest", "body must be a JSON object"};
    return body;
}

std::optional<std::uint64_t> expected_version(const json& body) {
    if (!body.contains("version") || body["version"].is_null()) return std::nullopt;
    if (!body["version"].is_number_unsigned()) throw HttpError{400, "BadRequest", "version must be a non-negative integer"};
    return body["version"].get<std::uint64_t>();
}

std::string required_string(const json& body, const char* key) {
    if (!body.contains(key) || !body[key].is_string())
        throw HttpError{400, "BadRequest", std::string("missing string field '") + key + "'"};
    return body[key].get<std::string>();
}

json topics_json(const std::vector<Topic>& topics) {
    json out = json::array();
    for (const Topic t : topics) out.push_back(std::string(name_of(t)));
    return out;
}

json assessment_json(const Assessment& a) {
    return {{"assessor", a.assessor_id}, {"choices", topics_json(a.choices)}, {"done", a.done}, {"comment", a.comment}};
}

json report_json(const ConflictReport& r) {
    return {{"choices", r.choices},
            {"matches", r.matches},
            {"conflict", to_fraction_string(r.conflict)},
            {"conflict_value", to_double(r.conflict)},
            {"ambiguous", r.ambiguous},
            {"scenario", std::string(to_string(r.scenario.kind))},
            {"candidates", topics_json(r.scenario.candidates)}};
}

json mutation_json(const LibraryCoordinate& lib, const Mutation& m) {
    return {{"library", lib.to_string()}, {"state", std::string(to_string(m.state))}, {"version", m.version}};
}

json vulnerability_json(const VulnerabilityRecord& v) {
    json j{{"cve_id", v.cve_id}};
    j["cvss"] = v.cvss_nvd ? json(v.cvss_nvd->value()) : json(nullptr);
    j["attack_vector"] = v.attack_vector ? json(std::string(to_string(*v.attack_vector))) : json(nullptr);
    return j;
}

// What an actor may see of a library in listings.
json library_summary(const ProjectData& data, const LibraryRecord& rec, const Actor& actor) {
    json j{{"library", rec.coordinate.to_string()}, {"state", std::string(to_string(rec.state))}, {"version", rec.version}};
    const bool finalized = rec.state == WorkflowState::Finalized;
    if (actor.role == Role::Assessor) {
        const Assessment* own = rec.assessment_of(actor.id);
        j["own_done"] = own && own->done;
        if (finalized) j["final_category"] = std::string(name_of(*rec.final_category));
        return j;
    }
    json done = json::object();
    for (const auto& id : data.assessor_ids()) {
        const Assessment* a = rec.assessment_of(id);
        done[id] = a && a->done;
    }
    j["done"] = done;
    if (rec.report) j["report"] = report_json(*rec.report);
    if (rec.final_category) j["final_category"] = std::string(name_of(*rec.final_category));
    if (const auto cls = final_class(rec, data.config.partition)) j["class"] = std::string(to_string(*cls));
    j["revision_marked"] = rec.revision_marked;
    return j;
}

json summary_json(const std::optional<CvssSummary>& s) {
    if (!s) return nullptr;
    return {{"n", s->n},
            {"min", CvssSummary::format(s->min)},
            {"median", CvssSummary::format(s->median)},
            {"max", CvssSummary::format(s->max)},
            {"avg", CvssSummary::format(s->mean)},
            {"stdev", CvssSummary::format(s->stdev)}};
}

json stats_json(const ProjectStats& st, std::uint64_t version) {
    json scenarios = json::object();
    for (const auto k : {ScenarioKind::AutoFinal, ScenarioKind::ChooseOne, ScenarioKind::ChooseFromUnion})
        scenarios[std::string(to_string(k))] = {{"count", st.scenarios.count(k)}, {"percent", st.scenarios.percent(k)}};
    json categories = json::array();
    for (const auto& info : list_topics())
        categories.push_back({{"category", info.name}, {"count", st.categories[index_of(info.topic)]}});
    json cvss = json::array();
    for (const auto& r : st.category_cvss)
        cvss.push_back({{"category", std::string(name_of(r.category))}, {"libraries", r.libraries}, {"cvss", summary_json(r.cvss)}});
    json classes = json::array();
    for (const auto& r : st.class_cvss)
        classes.push_back({{"class", std::string(to_string(r.cls))}, {"libraries", r.libraries}, {"cvss", summary_json(r.cvss)}});
    json kappa = nullptr;
    if (st.agreement.kappa) kappa = std::round(*st.agreement.kappa * 1e6) / 1e6;
    return {{"version", version},
            {"libraries", st.libraries},
            {"finalized", st.finalized},
            {"scenarios", scenarios},
            {"kappa", kappa},
            {"kappa_band", st.agreement.kappa ? json(std::string(landis_koch_band(*st.agreement.kappa))) : json(nullptr)},
            {"kappa_degenerate", st.agreement.degenerate},
            {"categories", categories},
            {"category_cvss", cvss},
            {"class_cvss", classes},
            {"cves", st.cves},
            {"cves_below_floor", st.cves_below_floor}};
}

void require_role(const Actor& actor, std::initializer_list<Role> roles) {
    for (const Role r : roles)
        if (actor.role == r) return;
    throw Error(ErrorCode::RoleViolation, "role " + std::string(to_string(actor.role)) + " may not use this endpoint");
}

}  // namespace

int status_for(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::RoleViolation: return 403;
    case ErrorCode::UnknownLibrary:
    case ErrorCode::NotFound: return 404;
    case ErrorCode::VersionConflict:
    case ErrorCode::AssessmentFrozen:
    case ErrorCode::AlreadyFinalized:
    case ErrorCode::NotQueueOwner: return 409;
    case ErrorCode::RateLimited: return 429;
    case ErrorCode::TransportError:
    case ErrorCode::UpstreamSchemaError: return 502;
    case ErrorCode::CorruptSnapshot:
    case ErrorCode::IoError: return 500;
    case ErrorCode::UnknownTopic:
    case ErrorCode::MalformedCoordinate:
    case ErrorCode::DuplicateCoordinate:
    case ErrorCode::InvalidUrl:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyEntry:
    case ErrorCode::InconsistentState:
    case ErrorCode::ChoiceOutsideCandidates:
    case ErrorCode::RevisionWithoutMark:
    case ErrorCode::TooManyChoices:
    case ErrorCode::InsufficientActors:
    case ErrorCode::InvalidTransition:
    case ErrorCode::DuplicateCve:
    case ErrorCode::DegenerateAgreement:
    case ErrorCode::EmptyInput:
    case ErrorCode::SheetMismatch: return 422;
    }
    return 500;
}

Secrets load_secrets(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read secrets file " + path.string());
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw Error(ErrorCode::InvalidArgument, "secrets file must map actor ids to secrets");
    Secrets out;
    for (const auto& [id, secret] : doc.items()) {
        if (!secret.is_string() || secret.get<std::string>().empty())
            throw Error(ErrorCode::InvalidArgument, "secret for '" + id + "' must be a non-empty string");
        out.emplace(id, secret.get<std::string>());
    }
    return out;
}

Service::Service(Project& project, Secrets secrets, Options options)
    : project_(project), secrets_(std::move(secrets)), options_(std::move(options)) {
    if (!options_.clock) options_.clock = [] { return std::chrono::system_clock::now(); };
}

Response Service::handle(const Request& request) {
    try {
        return route(request);
    } catch (const HttpError& e) {
        return error_response(e.status, e.code, e.message);
    } catch (const Error& e) {
        return error_response(status_for(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        return error_response(500, "InternalError", e.what());
    }
}

Response Service::create_session(const Request& request) {
    const json body = parse_body(request);
    const std::string id = required_string(body, "actor");
    const std::string secret = required_string(body, "secret");
    const auto it = secrets_.find(id);
    if (it == secrets_.end() || it->second != secret) throw HttpError{401, "Unauthorized", "unknown actor or wrong secret"};
    const Actor actor = project_.actor(id);
    const auto expiry = options_.clock() + options_.token_ttl;
    const std::string token = random_token();
    {
        std::lock_guard lock(sessions_mutex_);
        sessions_[token] = Session{actor, expiry};
    }
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(expiry.time_since_epoch()).count();
    return json_response(200, {{"token", token}, {"actor", actor.id}, {"role", std::string(to_string(actor.role))}, {"expires_at", seconds}});
}

Actor Service::authenticate(const Request& request) {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(request.token);
    if (request.token.empty() || it == sessions_.end()) throw HttpError{401, "Unauthorized", "missing or unknown session token"};
    if (options_.clock() >= it->second.expiry) {
        sessions_.erase(it);
        throw HttpError{401, "Unauthorized", "session expired"};
    }
    return it->second.actor;
}

void Service::persisted(const Mutation& m) {
    if (!m.changed || !options_.persist) return;
    std::lock_guard lock(persist_mutex_);
    options_.persist(project_.snapshot());
}

Response Service::route(const Request& request) {
    const auto parts = split_path(request.path);
    const std::string& method = request.method;
    if (parts.size() < 2 || parts[0] != "api") throw HttpError{404, "NotFound", "no such endpoint"};
    if (parts[1] == "session" && parts.size() == 2 && method == "POST") return create_session(request);

    const Actor actor = authenticate(request);
    const std::string& resource = parts[1];

    if (resource == "taxonomy" && parts.size() == 2 && method == "GET") {
        const ClassPartition partition = project_.config().partition;
        json out = json::array();
        for (const auto& info : list_topics()) {
            json subs = json::array();
            for (const auto& s : info.subcategories) subs.push_back(std::string(s));
            out.push_back({{"name", info.name},
                           {"class", std::string(to_string(partition.class_of(info.topic)))},
                           {"description", info.description},
                           {"subcategories", subs}});
        }
        return json_response(200, out);
    }

    if (resource == "libraries") {
        if (parts.size() == 2 && method == "GET") {
            const ProjectData data = project_.snapshot();
            std::optional<WorkflowState> filter;
            if (const auto it = request.query.find("state"); it != request.query.end() && !it->second.empty())
                filter = parse_workflow_state(it->second);
            json out = json::array();
            for (const auto& rec : data.libraries)
                if (!filter || rec.state == *filter) out.push_back(library_summary(data, rec, actor));
            return json_response(200, {{"version", data.version}, {"libraries", out}});
        }
        if (parts.size() == 4) {
            const LibraryCoordinate lib = parse_coordinate(parts[2]);
            const std::string& leaf = parts[3];
            if (leaf == "sources" && method == "GET") {
                const LibraryRecord rec = project_.library(lib);
                auto link = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
                return json_response(200, {{"library", lib.to_string()},
                                           {"version", rec.version},
                                           {"registry_entry", link(rec.sources.registry_entry)},
                                           {"repository", link(rec.sources.repository)},
                                           {"website", link(rec.sources.website)},
                                           {"wiki_doc", link(rec.sources.wiki_doc)}});
            }
            if (leaf == "assessments" && method == "GET") {
                if (const auto it = request.query.find("assessor");
                    actor.role == Role::Assessor && it != request.query.end() && it->second != actor.id)
                    throw Error(ErrorCode::RoleViolation, "assessors may only read their own assessment");
                const auto visible = project_.visible_assessments(actor.id, lib);
                json out = json::array();
                for (const auto& a : visible) out.push_back(assessment_json(a));
                return json_response(200, {{"library", lib.to_string()}, {"version", project_.library(lib).version}, {"assessments", out}});
            }
            if (leaf == "assessment" && method == "PUT") {
                require_role(actor, {Role::Assessor});
                const json body = parse_body(request);
                if (!body.contains("choices") || !body["choices"].is_array())
                    throw HttpError{400, "BadRequest", "missing array field 'choices'"};
                Assessment a;
                a.assessor_id = actor.id;
                for (const auto& c : body["choices"]) {
                    if (!c.is_string()) throw HttpError{400, "BadRequest", "choices must be topic names"};
                    a.choices.push_back(parse_topic(c.get<std::string>()));
                }
                a.done = body.value("done", false);
                a.comment = body.value("comment", "");
                const Mutation m = project_.submit_assessment(actor.id, lib, a, expected_version(body));
                persisted(m);
                return json_response(200, mutation_json(lib, m));
            }
        }
    }

    if (resource == "arbitration") {
        require_role(actor, {Role::Arbitrator});
        if (parts.size() == 3 && parts[2] == "queue" && method == "GET") {
            json out = json::array();
            for (const auto& item : project_.arbitration_queue(actor.id)) {
                json assessments = json::array();
                for (const auto& a : item.assessments) assessments.push_back(assessment_json(a));
                out.push_back({{"library", item.coordinate.to_string()},
                               {"report", report_json(item.report)},
                               {"candidates", topics_json(item.report.scenario.candidates)},
                               {"owner", item.owner ? json(*item.owner) : json(nullptr)},
                               {"assessments", assessments},
                               {"version", item.version}});
            }
            return json_response(200, {{"version", project_.version()}, {"queue", out}});
        }
        if (parts.size() == 4 && parts[3] == "claim" && method == "POST") {
            const LibraryCoordinate lib = parse_coordinate(parts[2]);
            const Mutation m = project_.claim(actor.id, lib, expected_version(parse_body(request)));
            persisted(m);
            return json_response(200, mutation_json(lib, m));
        }
        if (parts.size() == 3 && method == "PUT") {
            const LibraryCoordinate lib = parse_coordinate(parts[2]);
            const json body = parse_body(request);
            const Topic choice = parse_topic(required_string(body, "category"));
            const Mutation m = project_.submit_arbitration(actor.id, lib, choice, body.value("comment", ""), expected_version(body));
            persisted(m);
            return json_response(200, mutation_json(lib, m));
        }
    }

    if (resource == "revision") {
        require_role(actor, {Role::Arbitrator});
        if (parts.size() == 3 && parts[2] == "queue" && method == "GET") {
            json out = json::array();
            for (const auto& item : project_.revision_queue(actor.id)) {
                json vulns = json::array();
                for (const auto& v : item.vulnerabilities) vulns.push_back(vulnerability_json(v));
                out.push_back({{"library", item.coordinate.to_string()},
                               {"final_category", std::string(name_of(item.final_category))},
                               {"vulnerabilities", vulns},
                               {"version", item.version}});
            }
            return json_response(200, {{"version", project_.version()}, {"queue", out}});
        }
        if (parts.size() == 3 && method == "PUT") {
            const LibraryCoordinate lib = parse_coordinate(parts[2]);
            const json body = parse_body(request);
            const RevisionDecision decision = parse_revision_decision(required_string(body, "decision"));
            const Mutation m = project_.submit_revision(actor.id, lib, decision, required_string(body, "comment"), expected_version(body));
            persisted(m);
            return json_response(200, mutation_json(lib, m));
        }
    }

    if (resource == "stats" && parts.size() == 2 && method == "GET") {
        require_role(actor, {Role::Arbitrator, Role::Coordinator});
        const ProjectData data = project_.snapshot();
        return json_response(200, stats_json(compute_stats(data), data.version));
    }

    if (resource == "export" && parts.size() == 3 && method == "GET") {
        require_role(actor, {Role::Arbitrator, Role::Coordinator});
        const ProjectData data = project_.snapshot();
        const std::string& kind = parts[2];
        std::string body;
        if (kind == "arbitration")
            body = export_arbitration_sheet(data);
        else if (kind == "cves")
            body = export_cve_sheets(data).cves;
        else if (kind == "av")
            body = export_cve_sheets(data).av;
        else if (kind == "cvss")
            body = export_cve_sheets(data).cvss;
        else if (kind == "taxonomy")
            body = taxonomy_csv(data.config.partition);
        else
            throw HttpError{404, "NotFound", "unknown export '" + kind + "'"};
        return {200, "text/csv; charset=utf-8", body};
    }

    throw HttpError{404, "NotFound", "no such endpoint"};
}

void Service::serve(const std::string& host, int port, std::function<void(int)> ready) {
    httplib::Server server;
    auto adapter = [this](const httplib::Request& req, httplib::Response& res) {
        Request r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params) r.query[k] = v;
        const std::string auth = req.get_header_value("Authorization");
        if (auth.starts_with("Bearer ")) r.token = auth.substr(7);
        r.body = req.body;
        const Response out = handle(r);
        res.status = out.status;
        res.set_content(out.body, out.content_type);
    };
    server.Get(R"(/api/.*)", adapter);
    server.Put(R"(/api/.*)", adapter);
    server.Post(R"(/api/.*)", adapter);
    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
    {
        std::lock_guard lock(stop_mutex_);
        if (stop_requested_) return;
        stop_ = [&server] { server.stop(); };
    }
    if (ready) ready(bound);
    server.listen_after_bind();
    std::lock_guard lock(stop_mutex_);
    stop_ = nullptr;
}

void Service::stop() {
    std::lock_guard lock(stop_mutex_);
    stop_requested_ = true;
    if (stop_) stop_();
}

}  // namespace lcw::api
