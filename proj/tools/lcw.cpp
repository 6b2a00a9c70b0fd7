// lcw: batch driver for a categorisation project file.
#include "lcw/api.hpp"
#include "lcw/error.hpp"
#include "lcw/export.hpp"
#include "lcw/ingest.hpp"
#include "lcw/nvd.hpp"
#include "lcw/stats.hpp"
#include "lcw/store.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

namespace {

using namespace lcw;
namespace fs = std::filesystem;

class CountingTransport : public nvd::Transport {
public:
    explicit CountingTransport(nvd::Transport& inner) : inner_(inner) {}
    nvd::HttpResponse get(const std::string& target, const nvd::Headers& headers) override {
        ++calls;
        return inner_.get(target, headers);
    }
    std::atomic<std::size_t> calls{0};

private:
    nvd::Transport& inner_;
};

// Loads the project, applies `fn`, and saves against the loaded version.
template <typename Fn>
void update(const fs::path& path, Fn&& fn) {
    const ProjectData data = load_snapshot(path);
    Project project(data);
    fn(project);
    const ProjectData after = project.snapshot();
    if (after == data) return;
    save_snapshot(path, after, data.version);
}

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_path);
    out << text;
}

std::pair<std::string, int> split_addr(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "address must be HOST:PORT");
    return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
}

std::map<NetworkClass, std::size_t> parse_expectations(const std::vector<std::string>& items) {
    std::map<NetworkClass, std::size_t> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "expected CLASS=COUNT, got '" + item + "'");
        out[parse_network_class(item.substr(0, eq))] = std::stoul(item.substr(eq + 1));
    }
    return out;
}

void fetch_nvd(Project& project, nvd::Transport& transport, const fs::path& cache_dir, std::size_t rate,
               std::chrono::seconds window, std::optional<std::string> api_key, unsigned threads, bool refresh) {
    nvd::PayloadCache cache(cache_dir);
    nvd::RateLimiter limiter(rate, window);
    CountingTransport counting(transport);
    nvd::Client client(counting, limiter, &cache, std::move(api_key));

    const ProjectData data = project.snapshot();
    std::vector<std::string> ids;
    for (const auto& rec : data.libraries)
        for (const auto& v : rec.vulnerabilities)
            if (refresh || !v.cvss_nvd) ids.push_back(v.cve_id);

    std::vector<std::optional<nvd::Response>> responses(ids.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> missing{0};
    std::mutex failure_mutex;
    std::optional<Error> failure;
    auto worker = [&] {
        for (std::size_t i = next++; i < ids.size(); i = next++) {
            for (int attempt = 0;; ++attempt) {
                try {
                    responses[i] = client.fetch(ids[i]);
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::RateLimited && attempt < 3) {
                        std::this_thread::sleep_for(window);
                        continue;
                    }
                    if (e.code() == ErrorCode::NotFound) {
                        ++missing;
                        std::cerr << "warning: " << e.what() << "\n";
                    } else {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = e;
                    }
                }
                break;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::max(1u, threads); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) throw *failure;

    std::vector<nvd::Response> found;
    std::size_t without_v3 = 0;
    for (auto& r : responses)
        if (r) {
            if (!r->base_score) {
                ++without_v3;
                std::cerr << "warning: " << r->cve_id << " has no CVSS v3 metric\n";
            }
            found.push_back(std::move(*r));
        }
    for (const auto& rec : data.libraries) {
        if (rec.vulnerabilities.empty()) continue;
        project.set_vulnerabilities(rec.coordinate, attach_vulnerabilities(rec.vulnerabilities, found));
    }
    std::cout << "fetched " << found.size() << " CVEs (" << counting.calls.load() << " network requests, "
              << missing.load() << " not found, " << without_v3 << " without CVSS v3)\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Library categorisation workbench"};
    app.require_subcommand(1);
    std::string project_path = "project.json";
    if (const char* env = std::getenv("LCW_PROJECT")) project_path = env;
    app.add_option("-p,--project", project_path, "project snapshot file");

    auto* init = app.add_subcommand("init", "create a project file");
    std::string init_path;
    ProtocolConfig cfg;
    std::string threshold = "1/2";
    std::string floor = "7.0";
    init->add_option("path", init_path)->required();
    init->add_option("--assessors", cfg.assessors, "assessors per library (K)");
    init->add_option("--max-choices", cfg.max_choices, "categories per assessment (N)");
    init->add_option("--threshold", threshold, "ambiguity threshold T as a fraction");
    init->add_option("--severity-floor", floor, "minimum selection CVSS");

    auto* add_actor = app.add_subcommand("add-actor", "register an assessor, arbitrator or coordinator");
    std::string actor_id, actor_role;
    add_actor->add_option("id", actor_id)->required();
    add_actor->add_option("role", actor_role)->required()->check(CLI::IsMember({"assessor", "arbitrator", "coordinator"}));

    std::string input;
    auto* import_libs = app.add_subcommand("import-libs", "import a g:a list, one per line");
    import_libs->add_option("file", input)->required();
    auto* import_sources_cmd = app.add_subcommand("import-sources", "import the source registry CSV");
    import_sources_cmd->add_option("csv", input)->required();
    auto* import_cves_cmd = app.add_subcommand("import-cves", "import the CVE selection CSV");
    import_cves_cmd->add_option("csv", input)->required();
    auto* import_assessments_cmd = app.add_subcommand("import-assessments", "replay assessor entries from CSV");
    import_assessments_cmd->add_option("csv", input)->required();
    auto* import_decisions_cmd = app.add_subcommand("import-decisions", "replay arbitration and revision decisions");
    import_decisions_cmd->add_option("csv", input)->required();
    auto* import_sheet = app.add_subcommand("import-sheet", "replay an exported arbitration sheet");
    import_sheet->add_option("csv", input)->required();

    auto* fetch = app.add_subcommand("fetch-nvd", "enrich CVEs with NVD base score and attack vector");
    std::string cache_dir, replay, api_key_env = "NVD_API_KEY";
    std::size_t rate = 0;
    long window = 30;
    unsigned threads = 4;
    bool refresh = false;
    fetch->add_option("--cache", cache_dir, "payload cache directory (default <project>.nvd-cache)");
    fetch->add_option("--rate", rate, "requests per window (default 5, 50 with an API key, unlimited with --replay)");
    fetch->add_option("--window", window, "window length in seconds");
    fetch->add_option("--api-key-env", api_key_env, "environment variable holding an NVD API key");
    fetch->add_option("--replay", replay, "answer from recorded responses (JSON lines) instead of the network");
    fetch->add_option("--threads", threads, "concurrent fetchers");
    fetch->add_flag("--refresh", refresh, "refetch CVEs that already carry NVD data");

    auto* stats = app.add_subcommand("stats", "agreement, distribution and CVSS statistics");
    std::string out_path;
    std::vector<std::string> expect_class;
    stats->add_option("--out", out_path, "write chart-ready CSV series here");
    stats->add_option("--expect-class", expect_class, "reference class count, e.g. \"Local=48\"");

    auto* export_cmd = app.add_subcommand("export", "write a dataset sheet");
    std::string sheet = "arbitration";
    export_cmd->add_option("--sheet", sheet)->check(CLI::IsMember({"arbitration", "cves", "av", "cvss", "taxonomy"}));
    export_cmd->add_option("--out", out_path, "output file (stdout when omitted)");

    auto* serve = app.add_subcommand("serve", "run the HTTP API");
    std::string addr = "127.0.0.1:8080";
    std::string secrets_path;
    if (const char* env = std::getenv("LCW_SECRETS_FILE")) secrets_path = env;
    serve->add_option("--addr", addr, "HOST:PORT");
    serve->add_option("--secrets", secrets_path, "JSON map of actor id to secret (default $LCW_SECRETS_FILE)");

    CLI11_PARSE(app, argc, argv);

    const fs::path path = project_path;
    try {
        if (*init) {
            cfg.threshold = parse_fraction(threshold);
            cfg.severity_floor = CvssScore::parse(floor);
            cfg.validate();
            if (fs::exists(init_path)) throw Error(ErrorCode::IoError, init_path + " already exists");
            save_snapshot(init_path, Project(cfg).snapshot());
            std::cout << "initialised " << init_path << "\n";
        } else if (*add_actor) {
            update(path, [&](Project& p) { p.add_actor({actor_id, parse_role(actor_role)}); });
            std::cout << "actor " << actor_id << " (" << actor_role << ")\n";
        } else if (*import_libs) {
            const auto libs = [&] {
                try {
                    return import_library_list(read_text_file(input));
                } catch (const Error& e) {
                    throw Error(e.code(), input + ": " + e.what());
                }
            }();
            std::size_t added = 0;
            update(path, [&](Project& p) {
                const ProjectData data = p.snapshot();
                std::vector<LibraryCoordinate> fresh;
                for (const auto& c : libs)
                    if (!data.find_library(c.to_string())) fresh.push_back(c);
                if (!fresh.empty()) p.add_libraries(fresh);
                added = fresh.size();
            });
            std::cout << "imported " << libs.size() << " libraries";
            if (added != libs.size()) std::cout << " (" << added << " new)";
            std::cout << "\n";
        } else if (*import_sources_cmd || *import_cves_cmd || *import_assessments_cmd || *import_decisions_cmd ||
                   *import_sheet) {
            const std::string text = read_text_file(input);
            std::size_t rows = 0;
            update(path, [&](Project& p) {
                try {
                    if (*import_sources_cmd) rows = import_sources(p, text);
                    if (*import_cves_cmd) rows = import_cves(p, text);
                    if (*import_assessments_cmd) rows = import_assessments(p, text);
                    if (*import_decisions_cmd) rows = import_decisions(p, text);
                    if (*import_sheet) {
                        import_arbitration_sheet(p, text);
                        rows = p.snapshot().libraries.size();
                    }
                } catch (const Error& e) {
                    throw Error(e.code(), input + ": " + e.what());
                }
            });
            std::cout << "imported " << rows << " rows from " << input << "\n";
        } else if (*fetch) {
            std::optional<std::string> key;
            if (const char* k = std::getenv(api_key_env.c_str()); k && *k) key = k;
            // recorded responses need no throttling unless a rate is given
            if (rate == 0) rate = !replay.empty() ? std::numeric_limits<int>::max() : key ? 50 : 5;
            if (cache_dir.empty()) cache_dir = project_path + ".nvd-cache";
            nvd::RecordedTransport recorded;
            nvd::HttpsTransport https;
            nvd::Transport* transport = &https;
            if (!replay.empty()) {
                recorded.load_file(replay);
                transport = &recorded;
            }
            update(path, [&](Project& p) {
                fetch_nvd(p, *transport, cache_dir, rate, std::chrono::seconds(window), key, threads, refresh);
            });
        } else if (*stats) {
            const ProjectStats st = compute_stats(load_snapshot(path));
            std::cout << render_report(st);
            for (const auto& line : class_count_discrepancies(st, parse_expectations(expect_class)))
                std::cout << "discrepancy: " << line << "\n";
            if (!out_path.empty()) write_output(out_path, report_csv(st));
        } else if (*export_cmd) {
            const ProjectData data = load_snapshot(path);
            std::string text;
            if (sheet == "arbitration")
                text = export_arbitration_sheet(data);
            else if (sheet == "taxonomy")
                text = taxonomy_csv(data.config.partition);
            else {
                const CveSheets sheets = export_cve_sheets(data);
                text = sheet == "cves" ? sheets.cves : sheet == "av" ? sheets.av : sheets.cvss;
            }
            write_output(out_path, text);
        } else if (*serve) {
            if (secrets_path.empty()) throw Error(ErrorCode::InvalidArgument, "no secrets file (--secrets or LCW_SECRETS_FILE)");
            const ProjectData data = load_snapshot(path);
            Project project(data);
            std::uint64_t saved = data.version;
            api::Options options;
            options.persist = [&](const ProjectData& now) {
                save_snapshot(path, now, saved);
                saved = now.version;
            };
            api::Service service(project, api::load_secrets(secrets_path), options);
            const auto [host, port] = split_addr(addr);
            service.serve(host, port, [&, host = host](int bound) {
                std::cout << "listening on " << host << ":" << bound << "\n" << std::flush;
            });
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << " [" << to_string(e.code()) << "]\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
