#include "lcw/error.hpp"
#include "lcw/store.hpp"
#include "replication.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

using namespace lcw;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::IoError;
}

fs::path temp_file(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("lcw-store-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto p = dir / name;
    fs::remove(p);
    return p;
}

const ProjectData& replicated() {
    static const ProjectData data = lcw::testing::replicated_project().snapshot();
    return data;
}

json replicated_json() { return json::parse(snapshot_to_json(replicated())); }

json& library_named(json& doc, const std::string& artifact) {
    for (auto& l : doc["libraries"])
        if (l["coordinate"].dump().find(artifact) != std::string::npos) return l;
    throw std::runtime_error("library not in snapshot: " + artifact);
}

}  // namespace

TEST(Snapshot, RoundTripsTheReplicatedProject) {
    const ProjectData& data = replicated();
    EXPECT_NO_THROW(validate_snapshot(data));
    const std::string text = snapshot_to_json(data);
    const ProjectData back = snapshot_from_json(text);
    EXPECT_EQ(back, data);
    EXPECT_EQ(snapshot_to_json(back), text);
}

TEST(Snapshot, SaveAndLoad) {
    const auto path = temp_file("roundtrip.json");
    save_snapshot(path, replicated());
    EXPECT_EQ(load_snapshot(path), replicated());
    EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
    EXPECT_EQ(code_of([] { load_snapshot("/nonexistent/lcw/project.json"); }), ErrorCode::IoError);
}

TEST(Snapshot, TruncatedFileIsCorrupt) {
    const auto path = temp_file("truncated.json");
    const std::string text = snapshot_to_json(replicated());
    std::ofstream(path, std::ios::binary) << text.substr(0, text.size() / 2);
    EXPECT_EQ(code_of([&] { load_snapshot(path); }), ErrorCode::CorruptSnapshot);
    EXPECT_EQ(code_of([] { snapshot_from_json(""); }), ErrorCode::CorruptSnapshot);
}

TEST(Snapshot, TamperedFieldsAreCorrupt) {
    auto expect_corrupt = [](const json& doc, const char* what) {
        EXPECT_EQ(code_of([&] { snapshot_from_json(doc.dump()); }), ErrorCode::CorruptSnapshot) << what;
    };
    {
        json doc = replicated_json();
        doc["schema"] = 99;
        expect_corrupt(doc, "schema");
    }
    {
        json doc = replicated_json();
        auto& lib = library_named(doc, "stanford-corenlp");
        lib["final_category"] = "Database";
        expect_corrupt(doc, "category outside candidates");
    }
    {
        json doc = replicated_json();
        auto& lib = library_named(doc, "stanford-corenlp");
        lib["revised_class"] = "Local";
        expect_corrupt(doc, "revised class contradicts decision");
    }
    {
        json doc = replicated_json();
        auto& lib = library_named(doc, "jfinal");
        lib["assessments"][0]["choices"] = json::array({"Internet", "Database", "System"});
        expect_corrupt(doc, "too many choices");
    }
    {
        json doc = replicated_json();
        doc["actors"].push_back({{"id", "assessor-3"}, {"role", "assessor"}});
        expect_corrupt(doc, "extra assessor");
    }
    {
        json doc = replicated_json();
        doc["actors"][0]["role"] = "wizard";
        expect_corrupt(doc, "unknown role");
    }
    {
        json doc = replicated_json();
        doc["version"] = 1;
        expect_corrupt(doc, "version below history");
    }
    {
        json doc = replicated_json();
        doc["libraries"].push_back(doc["libraries"][0]);
        expect_corrupt(doc, "duplicate library");
    }
}

TEST(Snapshot, StaleBaseVersionIsRejected) {
    const auto path = temp_file("stale.json");
    Project p = lcw::testing::prepared_project();
    const ProjectData base = p.snapshot();
    save_snapshot(path, base);

    p.set_comment(lcw::testing::kJfinal, "first writer");
    save_snapshot(path, p.snapshot(), base.version);
    EXPECT_EQ(code_of([&] { save_snapshot(path, base, base.version); }), ErrorCode::VersionConflict);
    EXPECT_EQ(load_snapshot(path).find_library("com.jfinal:jfinal")->comment, "first writer");
}

// Two writers that loaded the same version race to save; exactly one wins.
TEST(Snapshot, ConcurrentStaleWritersGetOneConflict) {
    const auto path = temp_file("race.json");
    Project p = lcw::testing::prepared_project();
    const ProjectData base = p.snapshot();
    for (int round = 0; round < 10; ++round) {
        save_snapshot(path, base);
        std::atomic<int> conflicts{0};
        auto writer = [&](const std::string& comment) {
            ProjectData mine = base;
            mine.libraries[0].comment = comment;
            ++mine.libraries[0].version;
            ++mine.version;
            try {
                save_snapshot(path, mine, base.version);
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::VersionConflict);
                ++conflicts;
            }
        };
        std::thread a(writer, "writer a");
        std::thread b(writer, "writer b");
        a.join();
        b.join();
        EXPECT_EQ(conflicts.load(), 1);
        const auto comment = load_snapshot(path).libraries[0].comment;
        EXPECT_TRUE(comment == "writer a" || comment == "writer b");
    }
}
