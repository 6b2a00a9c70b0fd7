#include "lcw/taxonomy.hpp"

#include "lcw/csv.hpp"
#include "lcw/error.hpp"

#include <array>

namespace lcw {

namespace {

using sv = std::string_view;

constexpr std::array<sv, 0> kNone{};
constexpr std::array<sv, 11> kCommunications{"BBS", "Chat", "Conferencing", "Email", "FIDO", "Fax", "File Sharing",
                                              "Ham Radio", "Internet Phone", "Telephony", "Usenet News"};
constexpr std::array<sv, 2> kDatabase{"Database Engines/Servers", "Front-Ends"};
constexpr std::array<sv, 7> kDesktop{"File Managers", "GNUstep", "Gnome", "K Desktop Environment (KDE)", "PyQt",
                                     "Screen Savers", "Window Managers"};
constexpr std::array<sv, 1> kDocumentation{"Sphinx"};
constexpr std::array<sv, 2> kEducation{"Computer Aided Instruction (CAI)", "Testing"};
constexpr std::array<sv, 11> kGames{"Arcade", "Board Games", "First Person Shooters", "Fortune Cookies",
                                    "Multi-User Dungeons (MUD)", "Puzzle Games", "Real Time Strategy", "Role-Playing",
                                    "Side-Scrolling/Arcade Games", "Simulation", "Turn Based Strategy"};
constexpr std::array<sv, 9> kInternet{"File Transfer Protocol (FTP)", "Finger", "Log Analysis", "Name Service (DNS)",
                                      "Proxy Servers", "WAP", "WWW/HTTP", "XMPP", "Z39.50"};
constexpr std::array<sv, 3> kMultimedia{"Graphics", "Sound/Audio", "Video"};
constexpr std::array<sv, 5> kOffice{"Financial", "Groupware", "News/Diary", "Scheduling", "Office Suites"};
constexpr std::array<sv, 18> kScientific{"Artificial Intelligence", "Artificial Life", "Astronomy",
                                         "Atmospheric Science", "Bio-Informatics", "Chemistry",
                                         "Electronic Design Automation (EDA)", "GIS", "Hydrology", "Image Processing",
                                         "Image Recognition", "Information Analysis",
                                         "Interface Engine/Protocol Translator", "Mathematics",
                                         "Medical Science Apps.", "Oceanography", "Physics", "Visualization"};
constexpr std::array<sv, 1> kSecurity{"Cryptography"};
constexpr std::array<sv, 2> kSociology{"Genealogy", "History"};
constexpr std::array<sv, 20> kSoftwareDev{"Assemblers", "Bug Tracking", "Build Tools", "Code Generators", "Compilers",
                                          "Debuggers", "Disassemblers", "Documentation", "Embedded Systems",
                                          "Internationalization", "Interpreters", "Libraries", "Localization",
                                          "Object Brokering", "Pre-processors", "Quality Assurance", "Testing",
                                          "User Interfaces", "Version Control", "Widget Sets"};
constexpr std::array<sv, 21> kSystem{"Archiving", "Benchmark", "Boot", "Clustering", "Console Fonts",
                                     "Distributed Computing", "Emulators", "Filesystems", "Hardware",
                                     "Installation/Setup", "Logging", "Monitoring", "Networking", "Operating System",
                                     "Operating System Kernels", "Power (UPS)", "Recovery Tools", "Shells",
                                     "Software Distribution", "System Shells", "Systems Administration"};
constexpr std::array<sv, 3> kTerminals{"Serial", "Telnet", "Terminal Emulators/X Terminals"};
constexpr std::array<sv, 5> kTextEditors{"Documentation", "Emacs", "Integrated Development Environments (IDE)",
                                         "Text Processing", "Word Processors"};
constexpr std::array<sv, 6> kTextProcessing{"Filters", "Fonts", "General", "Indexing", "Linguistic", "Markup"};

const std::array<TopicInfo, kTopicCount> kTopics{{
    {Topic::AdaptiveTechnologies, "Adaptive Technologies",
     "Software used as proxy to interact with other software, e.g. to provide better compatibility, or support "
     "legacy versions, or add more services to the standard functionality.",
     kNone},
    {Topic::ArtisticSoftware, "Artistic Software",
     "Code used by digital artists to work, such as illustrators or fonts designers. Do not confuse with Multimedia "
     "(see below).",
     kNone},
    {Topic::Database, "Database",
     "Libraries whose main purpose is the creation/manipulation/interaction with database systems, including client "
     "and server ends.",
     kDatabase},
    {Topic::Communications, "Communications",
     "Code used to implement/deploy systems used for communications among humans, such as chat, E-mail, "
     "conferencing, IP-telephone, etc.",
     kCommunications},
    {Topic::DesktopEnvironment, "Desktop Environment",
     "Similar to System but specifically for the graphical desktop environment, e.g. windows manager, system "
     "graphical \"themes\", screensavers, etc. (see e.g. the Gnome and KDE projects).",
     kDesktop},
    {Topic::Documentation, "Documentation",
     "Libraries used to generate or process source code documentation, such as Doxygen (C/ C++), JavaDoc, Python "
     "docstrings, etc.",
     kDocumentation},
    {Topic::Education, "Education",
     "Libraries used for educational purposes, such as the \"Snap!\" visual programming language.", kEducation},
    {Topic::GamesEntertainment, "Games/Entertainment",
     "Software whose main purpose is to contribute to game development, such as a game engine (see e.g. the Ogre "
     "and Unreal engines), a games platform (Steam, GOG), etc.",
     kGames},
    {Topic::HomeAutomation, "Home Automation",
     "Code intended for domotics, i.e. automation of home/buildings appliances, including lighting and sound "
     "control, heaters, ventilation, door locking, etc.",
     kNone},
    {Topic::Internet, "Internet",
     "Software used mainly for remote (aka web) interaction, including client-server protocols, remote filesystems, "
     "website development, Internet routing, distributed workflow management, etc.",
     kInternet},
    {Topic::Multimedia, "Multimedia",
     "Libraries used for graphics, video, or sound reproduction and manipulation, e.g. multimedia players, OBS "
     "studio, VLC, Inkscape, alsamixer, OpenAL, etc.",
     kMultimedia},
    {Topic::OfficeBusiness, "Office/Business",
     "Libraries used to deploy typical office programs such as word and spreadsheets processors, financial "
     "calculators, calendars, etc. Think of Microsoft Office and Outlook.",
     kOffice},
    {Topic::OtherNonlisted, "Other/Nonlisted Topic",
     "If the library can't even be categorised as Utilities because of its very niche use, it falls into this "
     "bucket. E.g. a one-use script (that was uploaded as a Maven artifact).",
     kNone},
    {Topic::Printing, "Printing",
     "Libraries for communication to printers. Consider e.g. the CUPs functionality in Linux systems.", kNone},
    {Topic::Religion, "Religion", "For the explicit use of religious purposes.", kNone},
    {Topic::ScientificEngineering, "Scientific/Engineering",
     "Mostly related with academic research, i.e. software used in bleeding edge fields or technologies, such as AI "
     "development, physics simulators, theorem provers, medical science, etc.",
     kScientific},
    {Topic::Security, "Security",
     "Code used to implement/deploy security measures, e.g. user authentication, data encryption, secure "
     "communication channels, etc.",
     kSecurity},
    {Topic::Sociology, "Sociology",
     "Similar to Scientific/Engineering but specifically used for social sciences and in particular sociology. Does "
     "not include statistics: that should go in Scientific/Engineering.",
     kSociology},
    {Topic::SoftwareDevelopment, "Software Development",
     "Software for the development of more software. Think of IDEs, version control, bug tracking, compilers, QA, "
     "testing, etc. \"Documenation\" not included: it has its own category.",
     kSoftwareDev},
    {Topic::System, "System",
     "Anything used for typical operations in your own local system, e.g. file manipulation, resources monitoring, "
     "power management and boot, system shell, software package management, etc.",
     kSystem},
    {Topic::Terminals, "Terminals",
     "Libraries for deployment of terminals—not to confuse with \"shells\" which fall under System: terminals "
     "are the interface that lets you talk to the shell.",
     kTerminals},
    {Topic::TextEditors, "Text Editors",
     "Libraries used for basic text editing, such as Emacs, Vim, notepad, sublime, etc. Office-specific word "
     "processors (like Microsoft Word) don't fall here, but go to Office/Business instead.",
     kTextEditors},
    {Topic::TextProcessing, "Text Processing",
     "Software for processing (not input) generic text, e.g. regular expressions, filtering, markup. Examples are "
     "XML-HTML converters, regex filters, JSON serialisers, etc.",
     kTextProcessing},
    {Topic::Utilities, "Utilities",
     "Category for \"miscelanea\", i.e. anything you could not fit properly in any other category.", kNone},
}};

constexpr std::array<Topic, 6> kDefaultRemote{Topic::System,   Topic::Database, Topic::Communications,
                                              Topic::Security, Topic::Internet, Topic::Utilities};

sv trim(sv s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == sv::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::span<const TopicInfo> list_topics() noexcept { return kTopics; }

const TopicInfo& topic_info(Topic topic) noexcept { return kTopics[index_of(topic)]; }

std::string_view name_of(Topic topic) noexcept { return kTopics[index_of(topic)].name; }

std::optional<Topic> find_topic(std::string_view name) noexcept {
    const sv needle = trim(name);
    for (const auto& info : kTopics)
        if (info.name == needle) return info.topic;
    return std::nullopt;
}

Topic parse_topic(std::string_view name) {
    if (auto t = find_topic(name)) return *t;
    throw Error(ErrorCode::UnknownTopic, "unknown topic '" + std::string(name) + "'");
}

TopicMask mask_of(std::span<const Topic> topics) noexcept {
    TopicMask mask;
    for (Topic t : topics) mask.set(index_of(t));
    return mask;
}

std::vector<Topic> topics_in(const TopicMask& mask) {
    std::vector<Topic> out;
    for (std::size_t i = 0; i < kTopicCount; ++i)
        if (mask.test(i)) out.push_back(static_cast<Topic>(i));
    return out;
}

std::string_view to_string(NetworkClass cls) noexcept {
    return cls == NetworkClass::RemoteNetwork ? "Remote network" : "Local";
}

NetworkClass parse_network_class(std::string_view text) {
    const sv t = trim(text);
    if (t == "Remote network") return NetworkClass::RemoteNetwork;
    if (t == "Local") return NetworkClass::Local;
    throw Error(ErrorCode::InvalidArgument, "unknown class '" + std::string(text) + "'");
}

ClassPartition::ClassPartition() : remote_(mask_of(kDefaultRemote)) {}

ClassPartition ClassPartition::with_remote(std::span<const Topic> remote) {
    ClassPartition p;
    p.remote_ = mask_of(remote);
    return p;
}

NetworkClass class_of(Topic topic) noexcept {
    static const ClassPartition partition;
    return partition.class_of(topic);
}

std::string taxonomy_csv(const ClassPartition& partition) {
    std::string out;
    const std::array<std::string, 4> header{"name", "class", "description", "subcategories"};
    csv::append_row(out, header);
    for (const auto& info : kTopics) {
        std::string subs;
        for (std::size_t i = 0; i < info.subcategories.size(); ++i) {
            if (i) subs += "; ";
            subs += info.subcategories[i];
        }
        const std::array<std::string, 4> row{std::string(info.name), std::string(to_string(partition.class_of(info.topic))),
                                             std::string(info.description), subs};
        csv::append_row(out, row);
    }
    return out;
}

}  // namespace lcw
