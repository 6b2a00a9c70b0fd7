#pragma once

#include "lcw/error.hpp"
#include "lcw/workflow.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

namespace lcw::api {

struct Request {
    std::string method;  // GET, PUT, POST
    std::string path;    // "/api/libraries/g:a/sources"
    std::map<std::string, std::string> query;
    std::string token;  // bearer token, empty when absent
    std::string body;
};

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// HTTP status for a domain error code; each code maps to exactly one status.
int status_for(ErrorCode code) noexcept;

/// Actor id -> shared secret. File format: {"assessor-1": "secret", ...}.
using Secrets = std::map<std::string, std::string, std::less<>>;
Secrets load_secrets(const std::filesystem::path& path);

struct Options {
    std::chrono::seconds token_ttl{std::chrono::hours(8)};
    std::function<std::chrono::system_clock::time_point()> clock;
    /// Called after every state change with the new project state.
    std::function<void(const ProjectData&)> persist;
};

/// Request router over a project. `handle` is what the HTTP server calls and
/// can be driven directly without sockets.
class Service {
public:
    Service(Project& project, Secrets secrets, Options options = {});

    Response handle(const Request& request);

    /// Blocking HTTP listener on host:port. Port 0 picks a free port; `ready`
    /// receives the bound port once connections are accepted.
    void serve(const std::string& host, int port, std::function<void(int)> ready = {});
    void stop();

private:
    struct Session {
        Actor actor;
        std::chrono::system_clock::time_point expiry;
    };

    Project& project_;
    Secrets secrets_;
    Options options_;
    std::mutex sessions_mutex_;
    std::map<std::string, Session, std::less<>> sessions_;
    std::mutex persist_mutex_;
    std::mutex stop_mutex_;
    bool stop_requested_ = false;
    std::function<void()> stop_;

    Response route(const Request& request);
    Actor authenticate(const Request& request);
    Response create_session(const Request& request);
    void persisted(const Mutation& m);
};

}  // namespace lcw::api
