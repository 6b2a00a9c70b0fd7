#pragma once

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lcw {

/// The 24 top-level PyPI Topic classifiers, in canonical table order.
enum class Topic : std::uint8_t {
    AdaptiveTechnologies,
    ArtisticSoftware,
    Database,
    Communications,
    DesktopEnvironment,
    Documentation,
    Education,
    GamesEntertainment,
    HomeAutomation,
    Internet,
    Multimedia,
    OfficeBusiness,
    OtherNonlisted,
    Printing,
    Religion,
    ScientificEngineering,
    Security,
    Sociology,
    SoftwareDevelopment,
    System,
    Terminals,
    TextEditors,
    TextProcessing,
    Utilities,
};

inline constexpr std::size_t kTopicCount = 24;

using TopicMask = std::bitset<kTopicCount>;

struct TopicInfo {
    Topic topic;
    std::string_view name;
    std::string_view description;
    // Display help only; subcategories never take part in classification.
    std::span<const std::string_view> subcategories;
};

std::span<const TopicInfo> list_topics() noexcept;
const TopicInfo& topic_info(Topic topic) noexcept;
std::string_view name_of(Topic topic) noexcept;

constexpr std::size_t index_of(Topic topic) noexcept { return static_cast<std::size_t>(topic); }

/// Exact, case-sensitive lookup. Surrounding whitespace is ignored.
std::optional<Topic> find_topic(std::string_view name) noexcept;

/// Throws Error(UnknownTopic) for anything outside the closed set.
Topic parse_topic(std::string_view name);

TopicMask mask_of(std::span<const Topic> topics) noexcept;
std::vector<Topic> topics_in(const TopicMask& mask);

enum class NetworkClass : std::uint8_t { RemoteNetwork, Local };

/// "Remote network" / "Local"
std::string_view to_string(NetworkClass cls) noexcept;
NetworkClass parse_network_class(std::string_view text);

/// Total mapping Topic -> NetworkClass. Default-constructed partition puts
/// System, Database, Communications, Security, Internet and Utilities in
/// RemoteNetwork and everything else in Local.
class ClassPartition {
public:
    ClassPartition();

    static ClassPartition with_remote(std::span<const Topic> remote);

    NetworkClass class_of(Topic topic) const noexcept {
        return remote_.test(index_of(topic)) ? NetworkClass::RemoteNetwork : NetworkClass::Local;
    }

    std::vector<Topic> remote_topics() const { return topics_in(remote_); }

    bool operator==(const ClassPartition&) const = default;

private:
    TopicMask remote_;
};

/// Class under the default partition.
NetworkClass class_of(Topic topic) noexcept;

/// UTF-8 CSV: name,class,description,subcategories (joined by "; ").
std::string taxonomy_csv(const ClassPartition& partition = ClassPartition{});

}  // namespace lcw
