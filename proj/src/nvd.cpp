#include "lcw/nvd.hpp"

#include "lcw/error.hpp"

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

namespace lcw::nvd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const json* primary_metric(const json& metrics, const char* key) {
    const auto it = metrics.find(key);
    if (it == metrics.end() || !it->is_array() || it->empty()) return nullptr;
    for (const auto& entry : *it)
        if (entry.value("type", "") == "Primary") return &entry;
    return &it->front();
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_atomic(const fs::path& path, const std::string& data) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out << data;
        if (!out.flush()) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string query_cve_id(const std::string& target) {
    const auto pos = target.find("cveId=");
    if (pos == std::string::npos) return {};
    const auto start = pos + 6;
    return target.substr(start, target.find('&', start) - start);
}

std::chrono::milliseconds steady_now() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now().time_since_epoch());
}

}  // namespace

Response parse_payload(const std::string& cve_id, const std::string& body) {
    auto schema = [&](const std::string& what) {
        return Error(ErrorCode::UpstreamSchemaError, cve_id + ": " + what);
    };
    const json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw schema("response is not a JSON object");
    if (!doc.contains("totalResults") || !doc["totalResults"].is_number_integer())
        throw schema("missing totalResults");
    if (doc["totalResults"].get<long>() == 0) throw Error(ErrorCode::NotFound, cve_id + " is not known to NVD");
    if (!doc.contains("vulnerabilities") || !doc["vulnerabilities"].is_array())
        throw schema("vulnerabilities is missing or not an array");
    const json& vulns = doc["vulnerabilities"];
    if (vulns.empty()) throw Error(ErrorCode::NotFound, cve_id + " is not known to NVD");

    const json* cve = nullptr;
    for (const auto& v : vulns)
        if (v.contains("cve") && v["cve"].value("id", "") == cve_id) cve = &v["cve"];
    if (!cve) throw schema("response does not describe the requested CVE");

    Response r;
    r.cve_id = cve_id;
    r.raw_payload = body;
    const json metrics = cve->value("metrics", json::object());
    if (!metrics.is_object()) throw schema("metrics is not an object");
    for (const auto& [key, version] : {std::pair{"cvssMetricV31", "3.1"}, std::pair{"cvssMetricV30", "3.0"}}) {
        const json* m = primary_metric(metrics, key);
        if (!m) continue;
        if (!m->contains("cvssData") || !(*m)["cvssData"].is_object()) throw schema("metric without cvssData");
        const json& data = (*m)["cvssData"];
        if (!data.contains("baseScore") || !data["baseScore"].is_number() || !data.contains("attackVector") ||
            !data["attackVector"].is_string())
            throw schema("cvssData lacks baseScore or attackVector");
        try {
            r.base_score = CvssScore::from_double(data["baseScore"].get<double>());
            r.attack_vector = parse_attack_vector(data["attackVector"].get<std::string>());
        } catch (const Error& e) {
            throw schema(e.what());
        }
        r.cvss_version = version;
        break;
    }
    return r;
}

HttpsTransport::HttpsTransport(std::string host, int port, std::chrono::seconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

HttpResponse HttpsTransport::get(const std::string& target, const Headers& headers) {
    httplib::SSLClient client(host_, port_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.enable_server_certificate_verification(true);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Get(target, h);
    if (!res) throw Error(ErrorCode::TransportError, "request to " + host_ + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
}

void RecordedTransport::load_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json entry = json::parse(line, nullptr, false);
        if (entry.is_discarded() || !entry.contains("cve_id") || !entry.contains("status") || !entry.contains("body"))
            throw Error(ErrorCode::InvalidArgument, "malformed recorded response", number);
        add(entry["cve_id"].get<std::string>(), entry["status"].get<int>(), entry["body"].get<std::string>());
    }
}

void RecordedTransport::load_file(const fs::path& path) { load_jsonl(read_file(path)); }

void RecordedTransport::add(std::string cve_id, int status, std::string body) {
    responses_[std::move(cve_id)] = HttpResponse{status, std::move(body)};
}

HttpResponse RecordedTransport::get(const std::string& target, const Headers&) {
    ++calls_;
    const std::string id = query_cve_id(target);
    {
        std::lock_guard lock(mutex_);
        requested_.push_back(id);
    }
    const auto it = responses_.find(id);
    if (it == responses_.end()) return {404, ""};
    return it->second;
}

std::vector<std::string> RecordedTransport::requested() const {
    std::lock_guard lock(mutex_);
    return requested_;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::IoError, "sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

PayloadCache::PayloadCache(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_ / "objects");
    fs::create_directories(dir_ / "index");
}

std::optional<std::string> PayloadCache::get(const std::string& cve_id) const {
    if (!is_valid_cve_id(cve_id)) return std::nullopt;
    std::lock_guard lock(mutex_);
    const fs::path index = dir_ / "index" / cve_id;
    if (!fs::exists(index)) return std::nullopt;
    const std::string hash = read_file(index);
    const fs::path object = dir_ / "objects" / (hash + ".json");
    if (!fs::exists(object)) return std::nullopt;
    std::string body = read_file(object);
    if (sha256_hex(body) != hash) return std::nullopt;  // damaged object, refetch
    return body;
}

void PayloadCache::put(const std::string& cve_id, const std::string& body) {
    if (!is_valid_cve_id(cve_id)) throw Error(ErrorCode::InvalidArgument, "malformed CVE id '" + cve_id + "'");
    const std::string hash = sha256_hex(body);
    std::lock_guard lock(mutex_);
    const fs::path object = dir_ / "objects" / (hash + ".json");
    if (!fs::exists(object)) write_atomic(object, body);
    write_atomic(dir_ / "index" / cve_id, hash);
}

RateLimiter::RateLimiter(std::size_t limit, std::chrono::milliseconds window, Clock clock, Sleeper sleeper)
    : limit_(limit), window_(window), clock_(std::move(clock)), sleeper_(std::move(sleeper)) {
    if (limit_ == 0 || window_.count() <= 0)
        throw Error(ErrorCode::InvalidArgument, "rate limit needs a positive count and window");
    if (!clock_) clock_ = steady_now;
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::optional<std::chrono::milliseconds> RateLimiter::wait_time(std::chrono::milliseconds now) {
    while (!grants_.empty() && grants_.front() + window_ <= now) grants_.pop_front();
    if (grants_.size() < limit_) {
        grants_.push_back(now);
        return std::nullopt;
    }
    return grants_.front() + window_ - now;
}

std::chrono::milliseconds RateLimiter::acquire() {
    for (;;) {
        std::chrono::milliseconds wait{};
        {
            std::lock_guard lock(mutex_);
            const auto now = clock_();
            const auto w = wait_time(now);
            if (!w) return now;
            wait = *w;
        }
        sleeper_(wait);
    }
}

bool RateLimiter::try_acquire() {
    std::lock_guard lock(mutex_);
    return !wait_time(clock_()).has_value();
}

Client::Client(Transport& transport, RateLimiter& limiter, PayloadCache* cache, std::optional<std::string> api_key)
    : transport_(transport), limiter_(limiter), cache_(cache), api_key_(std::move(api_key)) {}

Response Client::fetch(const std::string& cve_id) {
    if (!is_valid_cve_id(cve_id)) throw Error(ErrorCode::InvalidArgument, "malformed CVE id '" + cve_id + "'");
    if (cache_)
        if (auto body = cache_->get(cve_id)) return parse_payload(cve_id, *body);

    limiter_.acquire();
    Headers headers;
    if (api_key_) headers.emplace_back("apiKey", *api_key_);
    const HttpResponse res = transport_.get(std::string(kCvePath) + "?cveId=" + cve_id, headers);
    switch (res.status) {
    case 200: break;
    case 404: throw Error(ErrorCode::NotFound, cve_id + " is not known to NVD");
    case 403:
    case 429: throw Error(ErrorCode::RateLimited, "NVD refused the request (HTTP " + std::to_string(res.status) + ")");
    default: throw Error(ErrorCode::TransportError, "NVD answered HTTP " + std::to_string(res.status));
    }
    Response r = parse_payload(cve_id, res.body);
    if (cache_) cache_->put(cve_id, res.body);
    return r;
}

}  // namespace lcw::nvd

namespace lcw {

std::vector<VulnerabilityRecord> attach_vulnerabilities(std::vector<VulnerabilityRecord> records,
                                                        std::span<const nvd::Response> responses) {
    for (auto& rec : records) {
        const auto it = std::find_if(responses.begin(), responses.end(),
                                     [&](const nvd::Response& r) { return r.cve_id == rec.cve_id; });
        if (it == responses.end()) continue;
        rec.cvss_nvd = it->base_score;
        rec.attack_vector = it->attack_vector;
    }
    return records;
}

}  // namespace lcw
