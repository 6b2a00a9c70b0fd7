#pragma once

#include "lcw/model.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lcw::nvd {

inline constexpr const char* kHost = "services.nvd.nist.gov";
inline constexpr const char* kCvePath = "/rest/json/cves/2.0";

struct Response {
    std::string cve_id;
    std::optional<CvssScore> base_score;
    std::optional<AttackVector> attack_vector;
    std::string cvss_version;  // "3.1", "3.0" or "" when no v3 metric exists
    std::string raw_payload;
};

/// Parses an NVD CVE API v2 document. Prefers cvssMetricV31 over V30 and the
/// Primary entry within a list. Throws NotFound for an empty result and
/// UpstreamSchemaError for a malformed document.
Response parse_payload(const std::string& cve_id, const std::string& body);

struct HttpResponse {
    int status = 0;
    std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

class Transport {
public:
    virtual ~Transport() = default;
    /// `target` is the path plus query string.
    virtual HttpResponse get(const std::string& target, const Headers& headers) = 0;
};

class HttpsTransport : public Transport {
public:
    explicit HttpsTransport(std::string host = kHost, int port = 443, std::chrono::seconds timeout = std::chrono::seconds(30));
    HttpResponse get(const std::string& target, const Headers& headers) override;

private:
    std::string host_;
    int port_;
    std::chrono::seconds timeout_;
};

/// Serves responses recorded as JSON lines {"cve_id", "status", "body"}.
/// Unknown ids answer 404.
class RecordedTransport : public Transport {
public:
    void load_jsonl(const std::string& text);
    void load_file(const std::filesystem::path& path);

    void add(std::string cve_id, int status, std::string body);
    HttpResponse get(const std::string& target, const Headers& headers) override;

    std::size_t calls() const noexcept { return calls_.load(); }
    std::vector<std::string> requested() const;

private:
    std::map<std::string, HttpResponse> responses_;
    std::atomic<std::size_t> calls_{0};
    mutable std::mutex mutex_;
    std::vector<std::string> requested_;
};

/// Content-addressed payload store: objects/<sha256>.json holds the raw body,
/// index/<cve-id> names the object. Writes go through a temp file and rename.
class PayloadCache {
public:
    explicit PayloadCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string& cve_id) const;
    void put(const std::string& cve_id, const std::string& body);
    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

std::string sha256_hex(const std::string& data);

/// At most `limit` grants inside any window of length `window` (sliding log).
class RateLimiter {
public:
    using Clock = std::function<std::chrono::milliseconds()>;
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    RateLimiter(std::size_t limit, std::chrono::milliseconds window, Clock clock = {}, Sleeper sleeper = {});

    /// Blocks (through the sleeper) until a slot is free; returns the grant time.
    std::chrono::milliseconds acquire();
    bool try_acquire();

    std::size_t limit() const noexcept { return limit_; }
    std::chrono::milliseconds window() const noexcept { return window_; }

private:
    std::size_t limit_;
    std::chrono::milliseconds window_;
    Clock clock_;
    Sleeper sleeper_;
    std::mutex mutex_;
    std::deque<std::chrono::milliseconds> grants_;

    std::optional<std::chrono::milliseconds> wait_time(std::chrono::milliseconds now);
};

class Client {
public:
    Client(Transport& transport, RateLimiter& limiter, PayloadCache* cache = nullptr,
           std::optional<std::string> api_key = std::nullopt);

    /// Cache first; a hit performs no transport call.
    Response fetch(const std::string& cve_id);

private:
    Transport& transport_;
    RateLimiter& limiter_;
    PayloadCache* cache_;
    std::optional<std::string> api_key_;
};

}  // namespace lcw::nvd

namespace lcw {

/// Copies NVD score and attack vector onto the matching records; record order
/// is kept and records without a response are left untouched.
std::vector<VulnerabilityRecord> attach_vulnerabilities(std::vector<VulnerabilityRecord> records,
                                                        std::span<const nvd::Response> responses);

}  // namespace lcw
