#include "lcw/error.hpp"
#include "lcw/protocol.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

using namespace lcw;

namespace {

constexpr Topic X = Topic::Internet;
constexpr Topic Y = Topic::TextProcessing;
constexpr Topic Z = Topic::Database;
constexpr Topic W = Topic::Security;

AssessmentMatrix matrix(std::vector<std::vector<Topic>> entries) { return {parse_coordinate("t:lib"), std::move(entries)}; }

// Counts, for every topic, how many assessors picked it; the metric follows
// from the definition of misses over explicit choices.
Rational oracle_conflict(const std::vector<std::vector<Topic>>& entries) {
    std::map<int, int> picked_by;
    long choices = 0;
    for (const auto& e : entries) {
        std::set<int> distinct;
        for (const Topic t : e) distinct.insert(static_cast<int>(t));
        choices += static_cast<long>(distinct.size());
        for (const int t : distinct) ++picked_by[t];
    }
    long matches = 0;
    for (const auto& [topic, count] : picked_by)
        if (count == static_cast<int>(entries.size())) ++matches;
    return Rational(choices - static_cast<long>(entries.size()) * matches, choices);
}

std::vector<Topic> random_set(std::mt19937& rng, int max_size, int universe) {
    std::uniform_int_distribution<int> size(1, max_size);
    std::uniform_int_distribution<int> pick(0, universe - 1);
    std::vector<Topic> out;
    const int n = size(rng);
    while (static_cast<int>(out.size()) < n) {
        const auto t = static_cast<Topic>(pick(rng));
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
    return out;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::IoError;
}

}  // namespace

TEST(Conflict, TableRows) {
    const ProtocolConfig cfg;
    struct Row {
        std::vector<std::vector<Topic>> entries;
        Rational conflict;
        bool ambiguous;
    };
    const std::vector<Row> rows{
        {{{X}, {X}}, Rational(0), false},
        {{{X, Y}, {X, Y}}, Rational(0), false},
        {{{X, Y}, {X}}, Rational(1, 3), false},
        {{{X, Y}, {X, Z}}, Rational(1, 2), false},
        {{{X}, {Y}}, Rational(1), true},
        {{{X, Y}, {Z}}, Rational(1), true},
        {{{X, Y}, {Z, W}}, Rational(1), true},
    };
    for (const auto& r : rows) {
        const Rational c = compute_conflict(matrix(r.entries));
        EXPECT_EQ(c, r.conflict);
        EXPECT_EQ(is_ambiguous(c, cfg), r.ambiguous);
    }
}

TEST(Conflict, UnanimousThreeAssessors) { EXPECT_EQ(compute_conflict(matrix({{X}, {X}, {X}})), Rational(0)); }

TEST(Conflict, EmptyEntryIsAnError) {
    EXPECT_EQ(code_of([] { compute_conflict(matrix({{X}, {}})); }), ErrorCode::EmptyEntry);
    EXPECT_EQ(code_of([] { compute_conflict(matrix({{X}})); }), ErrorCode::InvalidArgument);
}

TEST(Conflict, MatchesBruteForceOracleOnRandomThreeAssessorInputs) {
    std::mt19937 rng(7);
    for (int i = 0; i < 2000; ++i) {
        std::vector<std::vector<Topic>> entries;
        for (int k = 0; k < 3; ++k) entries.push_back(random_set(rng, 2, 5));
        EXPECT_EQ(compute_conflict(matrix(entries)), oracle_conflict(entries));
    }
}

TEST(Conflict, MatchesOracleForWiderSettings) {
    std::mt19937 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const int k = 2 + static_cast<int>(rng() % 4);
        std::vector<std::vector<Topic>> entries;
        for (int a = 0; a < k; ++a) entries.push_back(random_set(rng, 4, 6));
        EXPECT_EQ(compute_conflict(matrix(entries)), oracle_conflict(entries));
    }
}

TEST(Conflict, PermutationInvariant) {
    std::mt19937 rng(3);
    for (int i = 0; i < 500; ++i) {
        std::vector<std::vector<Topic>> entries;
        for (int k = 0; k < 3; ++k) entries.push_back(random_set(rng, 3, 6));
        const Rational base = compute_conflict(matrix(entries));
        auto shuffled = entries;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (auto& e : shuffled) std::shuffle(e.begin(), e.end(), rng);
        EXPECT_EQ(compute_conflict(matrix(shuffled)), base);
    }
}

TEST(Conflict, ZeroExactlyWhenAllSetsEqual) {
    std::mt19937 rng(5);
    for (int i = 0; i < 2000; ++i) {
        std::vector<std::vector<Topic>> entries{random_set(rng, 2, 3), random_set(rng, 2, 3), random_set(rng, 2, 3)};
        const bool equal = mask_of(entries[0]) == mask_of(entries[1]) && mask_of(entries[1]) == mask_of(entries[2]);
        EXPECT_EQ(compute_conflict(matrix(entries)) == Rational(0), equal);
    }
}

// Every two-assessor input with at most two choices each, over a universe large
// enough to realise every overlap shape.
TEST(Conflict, ExhaustiveTwoAssessorImage) {
    std::vector<std::vector<Topic>> sets;
    constexpr int universe = 4;
    for (int a = 0; a < universe; ++a) {
        sets.push_back({static_cast<Topic>(a)});
        for (int b = 0; b < universe; ++b)
            if (a != b) sets.push_back({static_cast<Topic>(a), static_cast<Topic>(b)});
    }
    std::set<Rational> image;
    const ProtocolConfig cfg;
    for (const auto& a : sets)
        for (const auto& b : sets) {
            const auto m = matrix({a, b});
            const Rational c = compute_conflict(m);
            EXPECT_EQ(c, oracle_conflict(m.entries));
            image.insert(c);
            const Scenario s = derive_scenario(m, cfg);
            const auto inter = mask_of(a) & mask_of(b);
            if (c > Rational(1, 2)) {
                EXPECT_EQ(s.kind, ScenarioKind::ChooseFromUnion);
                EXPECT_EQ(mask_of(s.candidates), mask_of(a) | mask_of(b));
            } else if (inter.count() == 1) {
                EXPECT_EQ(s.kind, ScenarioKind::AutoFinal);
            } else {
                EXPECT_EQ(s.kind, ScenarioKind::ChooseOne);
                EXPECT_EQ(inter.count(), 2u);
            }
            for (const Topic t : s.candidates) EXPECT_TRUE(mask_of(a).test(index_of(t)) || mask_of(b).test(index_of(t)));
        }
    EXPECT_EQ(image, (std::set<Rational>{Rational(0), Rational(1, 3), Rational(1, 2), Rational(1)}));
}

TEST(Ambiguity, StrictThreshold) {
    ProtocolConfig cfg;
    EXPECT_FALSE(is_ambiguous(Rational(1, 2), cfg));
    EXPECT_TRUE(is_ambiguous(Rational(1), cfg));
    for (const Rational t : {Rational(0), Rational(1, 3), Rational(99, 100)}) {
        cfg.threshold = t;
        EXPECT_FALSE(is_ambiguous(Rational(0), cfg));
    }
}

// With an empty intersection the metric is exactly 1, which exceeds any T < 1,
// so "not ambiguous without a shared category" never arises.
TEST(Scenario, EmptyIntersectionIsAlwaysAmbiguous) {
    std::mt19937 rng(13);
    for (const Rational t : {Rational(0), Rational(1, 2), Rational(4, 5), Rational(999, 1000)}) {
        ProtocolConfig cfg;
        cfg.threshold = t;
        for (int i = 0; i < 300; ++i) {
            std::vector<std::vector<Topic>> entries{random_set(rng, 2, 8), random_set(rng, 2, 8), random_set(rng, 2, 8)};
            const auto m = matrix(entries);
            if ((mask_of(entries[0]) & mask_of(entries[1]) & mask_of(entries[2])).none()) {
                EXPECT_EQ(compute_conflict(m), Rational(1));
                EXPECT_EQ(derive_scenario(m, cfg).kind, ScenarioKind::ChooseFromUnion);
            }
        }
    }
}

TEST(Scenario, WorkedExamples) {
    const ProtocolConfig cfg;
    EXPECT_EQ(derive_scenario(matrix({{X}, {X}}), cfg), (Scenario{ScenarioKind::AutoFinal, {X}}));
    EXPECT_EQ(derive_scenario(matrix({{X, Y}, {Y, X}}), cfg).kind, ScenarioKind::ChooseOne);
    EXPECT_EQ(mask_of(derive_scenario(matrix({{X, Y}, {X, Y}}), cfg).candidates), mask_of(std::vector{X, Y}));
    EXPECT_EQ(derive_scenario(matrix({{X}, {Y}}), cfg).kind, ScenarioKind::ChooseFromUnion);
    EXPECT_EQ(derive_scenario(matrix({{X, Y}, {X, Z}}), cfg), (Scenario{ScenarioKind::AutoFinal, {X}}));
    EXPECT_EQ(derive_scenario(matrix({{X, Y}, {X}}), cfg), (Scenario{ScenarioKind::AutoFinal, {X}}));
}

TEST(Scenario, ReportCarriesIntermediateCounts) {
    const auto r = analyze(matrix({{Topic::ScientificEngineering}, {Topic::Internet, Topic::TextProcessing}}), ProtocolConfig{});
    EXPECT_EQ(r.choices, 3);
    EXPECT_EQ(r.matches, 0);
    EXPECT_EQ(r.conflict, Rational(1));
    EXPECT_TRUE(r.ambiguous);
    EXPECT_EQ(r.scenario.kind, ScenarioKind::ChooseFromUnion);
    EXPECT_EQ(r.scenario.candidates.size(), 3u);
}

TEST(Finalize, ArbitratorPicksFromCandidates) {
    const ProtocolConfig cfg;
    const auto corenlp = matrix({{Topic::ScientificEngineering}, {Topic::Internet, Topic::TextProcessing}});
    const Scenario s = derive_scenario(corenlp, cfg);
    EXPECT_EQ(finalize(s, Topic::ScientificEngineering), Topic::ScientificEngineering);
    EXPECT_EQ(finalize(Scenario{ScenarioKind::AutoFinal, {X}}, std::nullopt), X);
    EXPECT_EQ(finalize(Scenario{ScenarioKind::AutoFinal, {X}}, Y), X);
    EXPECT_EQ(code_of([] { finalize(Scenario{ScenarioKind::ChooseOne, {X, Y}}, Z); }), ErrorCode::ChoiceOutsideCandidates);
    EXPECT_EQ(code_of([] { finalize(Scenario{ScenarioKind::ChooseOne, {X, Y}}, std::nullopt); }), ErrorCode::InvalidArgument);
}

TEST(Finalize, InvariantUnderConsistentRelabeling) {
    std::mt19937 rng(17);
    std::vector<int> perm(kTopicCount);
    const ProtocolConfig cfg;
    for (int i = 0; i < 300; ++i) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        auto relabel = [&](Topic t) { return static_cast<Topic>(perm[index_of(t)]); };
        std::vector<std::vector<Topic>> entries{random_set(rng, 2, 5), random_set(rng, 2, 5)};
        auto renamed = entries;
        for (auto& e : renamed)
            for (auto& t : e) t = relabel(t);
        const auto s = derive_scenario(matrix(entries), cfg);
        const auto r = derive_scenario(matrix(renamed), cfg);
        ASSERT_EQ(s.kind, r.kind);
        const Topic pick = s.candidates[rng() % s.candidates.size()];
        EXPECT_EQ(relabel(finalize(s, pick)), finalize(r, relabel(pick)));
    }
}

TEST(Revision, MarkingNeedsLocalClassAndNetworkVector) {
    VulnerabilityRecord net{"CVE-2020-0001", {}, {}, AttackVector::Network, {}};
    VulnerabilityRecord local{"CVE-2020-0002", {}, {}, AttackVector::Local, {}};
    VulnerabilityRecord physical{"CVE-2020-0003", {}, {}, AttackVector::Physical, {}};
    EXPECT_TRUE(needs_class_revision(NetworkClass::Local, std::vector{net}));
    EXPECT_TRUE(needs_class_revision(NetworkClass::Local, std::vector{local, net}));
    EXPECT_FALSE(needs_class_revision(NetworkClass::RemoteNetwork, std::vector{net}));
    EXPECT_FALSE(needs_class_revision(NetworkClass::Local, std::vector{local, physical}));
    EXPECT_FALSE(needs_class_revision(NetworkClass::Local, std::vector<VulnerabilityRecord>{}));
}

TEST(Revision, KeepAndEscalate) {
    EXPECT_EQ(revise_class(NetworkClass::Local, RevisionDecision::Escalate, "CVEs describe XML vulnerabilities of the server", true),
              NetworkClass::RemoteNetwork);
    EXPECT_EQ(revise_class(NetworkClass::Local, RevisionDecision::Keep, "irrelevant for the categorisation of this library", true),
              NetworkClass::Local);
    const auto once = revise_class(NetworkClass::Local, RevisionDecision::Escalate, "x", true);
    EXPECT_EQ(revise_class(once, RevisionDecision::Keep, "x", true), once);
    EXPECT_EQ(revise_class(once, RevisionDecision::Keep, "x", true), revise_class(once, RevisionDecision::Keep, "x", true));
    EXPECT_EQ(code_of([] { revise_class(NetworkClass::Local, RevisionDecision::Keep, "x", false); }), ErrorCode::RevisionWithoutMark);
    EXPECT_EQ(code_of([] { revise_class(NetworkClass::Local, RevisionDecision::Keep, "  ", true); }), ErrorCode::InvalidArgument);
}

TEST(Revision, EscalationIsMonotone) {
    std::mt19937 rng(23);
    for (int run = 0; run < 500; ++run) {
        NetworkClass cls = rng() % 2 ? NetworkClass::Local : NetworkClass::RemoteNetwork;
        for (int step = 0; step < 20; ++step) {
            const auto decision = rng() % 2 ? RevisionDecision::Keep : RevisionDecision::Escalate;
            const NetworkClass next = revise_class(cls, decision, "c", true);
            EXPECT_FALSE(cls == NetworkClass::RemoteNetwork && next == NetworkClass::Local);
            cls = next;
        }
    }
}

TEST(Choices, Validation) {
    ProtocolConfig cfg;
    EXPECT_NO_THROW(validate_choices(std::vector{X, Y}, cfg));
    EXPECT_EQ(code_of([&] { validate_choices(std::vector{X, Y, Z}, cfg); }), ErrorCode::TooManyChoices);
    EXPECT_EQ(code_of([&] { validate_choices(std::vector{X, X}, cfg); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { validate_choices(std::vector<Topic>{}, cfg); }), ErrorCode::EmptyEntry);
    cfg.max_choices = 3;
    EXPECT_NO_THROW(validate_choices(std::vector{X, Y, Z}, cfg));
}
