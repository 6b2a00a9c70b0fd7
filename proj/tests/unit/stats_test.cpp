#include "lcw/dataset.hpp"
#include "lcw/error.hpp"
#include "lcw/stats.hpp"
#include "replication.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace lcw;

namespace {

constexpr Topic X = Topic::Internet;
constexpr Topic Y = Topic::TextProcessing;
constexpr Topic Z = Topic::Database;
constexpr Topic W = Topic::Security;

// Textbook Fleiss: per-item agreement P_i, their mean, and chance agreement from
// the category proportions, all in floating point over an explicit count table.
double textbook_kappa(const std::vector<std::vector<int>>& table) {
    const double big_n = static_cast<double>(table.size());
    const double n = std::accumulate(table[0].begin(), table[0].end(), 0.0);
    const std::size_t k = table[0].size();
    std::vector<double> p(k, 0.0);
    double p_bar = 0;
    for (const auto& row : table) {
        double s = 0;
        for (std::size_t j = 0; j < k; ++j) {
            s += row[j] * (row[j] - 1.0);
            p[j] += row[j];
        }
        p_bar += s / (n * (n - 1));
    }
    p_bar /= big_n;
    double p_e = 0;
    for (double& pj : p) {
        pj /= big_n * n;
        p_e += pj * pj;
    }
    return (p_bar - p_e) / (1 - p_e);
}

std::string fmt(long hundredths) { return CvssSummary::format(hundredths); }

std::vector<CvssScore> scores(std::initializer_list<int> tenths) {
    std::vector<CvssScore> out;
    for (int t : tenths) out.push_back(CvssScore::from_tenths(t));
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

TEST(ReducePair, WorkedExamples) {
    EXPECT_EQ(reduce_pair(std::vector{X, Y}, std::vector{X}), std::pair(X, X));
    EXPECT_EQ(reduce_pair(std::vector{X, Y}, std::vector{Y}), std::pair(Y, Y));
    EXPECT_EQ(reduce_pair(std::vector{X, Y}, std::vector{Z}), std::pair(X, Z));
    EXPECT_EQ(reduce_pair(std::vector{X, Y}, std::vector{Z, W}), std::pair(X, Z));
    EXPECT_EQ(reduce_pair(std::vector{X}, std::vector{Z, X}), std::pair(X, X));
    EXPECT_EQ(reduce_pair(std::vector{X}, std::vector{Z, W}), std::pair(X, Z));
}

// Exhaustive over every ordered one- or two-choice list from four topics.
TEST(ReducePair, ExhaustiveSmallCases) {
    const std::vector<Topic> u{X, Y, Z, W};
    std::vector<std::vector<Topic>> lists;
    for (Topic a : u) {
        lists.push_back({a});
        for (Topic b : u)
            if (a != b) lists.push_back({a, b});
    }
    for (const auto& a : lists)
        for (const auto& b : lists) {
            const auto [ra, rb] = reduce_pair(a, b);
            EXPECT_NE(std::find(a.begin(), a.end(), ra), a.end());
            EXPECT_NE(std::find(b.begin(), b.end(), rb), b.end());
            std::optional<Topic> shared;
            for (Topic t : a)
                if (!shared && std::find(b.begin(), b.end(), t) != b.end()) shared = t;
            if (shared)
                EXPECT_EQ(std::pair(ra, rb), std::pair(*shared, *shared));
            else
                EXPECT_EQ(std::pair(ra, rb), std::pair(a.front(), b.front()));
        }
}

TEST(Kappa, MatchesTextbookOracle) {
    std::mt19937 rng(101);
    const std::vector<Topic> cats{X, Y, Z, W, Topic::Multimedia};
    for (int instance = 0; instance < 100; ++instance) {
        std::vector<std::pair<Topic, Topic>> items;
        std::vector<std::vector<int>> table;
        for (int i = 0; i < 20; ++i) {
            const int a = static_cast<int>(rng() % 5);
            const int b = rng() % 3 == 0 ? a : static_cast<int>(rng() % 5);
            items.emplace_back(cats[a], cats[b]);
            std::vector<int> row(5, 0);
            ++row[a];
            ++row[b];
            table.push_back(row);
        }
        double expected = 0;
        try {
            expected = textbook_kappa(table);
        } catch (...) {
            continue;
        }
        if (!std::isfinite(expected)) continue;
        EXPECT_NEAR(fleiss_kappa(items), expected, 1e-9);
    }
}

TEST(Kappa, MoreRatersMatchTextbookOracle) {
    std::mt19937 rng(7);
    for (int instance = 0; instance < 50; ++instance) {
        std::vector<std::vector<Topic>> items;
        std::vector<std::vector<int>> table;
        for (int i = 0; i < 15; ++i) {
            std::vector<Topic> item;
            std::vector<int> row(4, 0);
            for (int r = 0; r < 4; ++r) {
                const int c = static_cast<int>(rng() % 4);
                item.push_back(static_cast<Topic>(c * 3));
                ++row[c];
            }
            items.push_back(item);
            table.push_back(row);
        }
        EXPECT_NEAR(fleiss_kappa(items), textbook_kappa(table), 1e-9);
    }
}

TEST(Kappa, PerfectAgreementIsOne) {
    const std::vector<std::pair<Topic, Topic>> items{{X, X}, {Y, Y}, {Z, Z}, {X, X}};
    EXPECT_DOUBLE_EQ(fleiss_kappa(items), 1.0);
}

TEST(Kappa, DegenerateAndEmpty) {
    const std::vector<std::pair<Topic, Topic>> same{{X, X}, {X, X}};
    EXPECT_EQ(code_of([&] { fleiss_kappa(same); }), ErrorCode::DegenerateAgreement);
    EXPECT_EQ(code_of([] { fleiss_kappa(std::span<const std::pair<Topic, Topic>>{}); }), ErrorCode::EmptyInput);
    const std::vector<std::vector<Topic>> ragged{{X, Y}, {X}};
    EXPECT_EQ(code_of([&] { fleiss_kappa(ragged); }), ErrorCode::InvalidArgument);
}

TEST(Kappa, InvariantUnderRelabelingAndPermutation) {
    std::mt19937 rng(55);
    for (int instance = 0; instance < 100; ++instance) {
        std::vector<std::pair<Topic, Topic>> items;
        for (int i = 0; i < 12; ++i)
            items.emplace_back(static_cast<Topic>(rng() % 6), static_cast<Topic>(rng() % 6));
        double base = 0;
        try {
            base = fleiss_kappa(items);
        } catch (const Error&) {
            continue;
        }
        EXPECT_GE(base, -1.0);
        EXPECT_LE(base, 1.0);
        std::vector<int> perm(kTopicCount);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        auto renamed = items;
        for (auto& [a, b] : renamed) {
            a = static_cast<Topic>(perm[index_of(a)]);
            b = static_cast<Topic>(perm[index_of(b)]);
        }
        std::shuffle(renamed.begin(), renamed.end(), rng);
        EXPECT_NEAR(fleiss_kappa(renamed), base, 1e-12);
    }
}

TEST(Kappa, Bands) {
    EXPECT_EQ(landis_koch_band(-0.1), "poor");
    EXPECT_EQ(landis_koch_band(0.1), "slight");
    EXPECT_EQ(landis_koch_band(0.381599), "fair");
    EXPECT_EQ(landis_koch_band(0.5), "moderate");
    EXPECT_EQ(landis_koch_band(0.7), "substantial");
    EXPECT_EQ(landis_koch_band(0.9), "almost perfect");
}

TEST(Cvss, TwoValueRowUsesPopulationStdev) {
    const auto s = cvss_stats(scores({68, 91}));
    EXPECT_EQ(fmt(s.min), "6.80");
    EXPECT_EQ(fmt(s.median), "7.95");
    EXPECT_EQ(fmt(s.max), "9.10");
    EXPECT_EQ(fmt(s.mean), "7.95");
    EXPECT_EQ(fmt(s.stdev), "1.15");
    const double sample = std::sqrt((std::pow(6.8 - 7.95, 2) + std::pow(9.1 - 7.95, 2)) / 1.0);
    EXPECT_EQ(fmt(std::lround(sample * 100)), "1.63");
    EXPECT_NE(fmt(std::lround(sample * 100)), fmt(s.stdev));
}

TEST(Cvss, SingleAndConstantValues) {
    const auto one = cvss_stats(scores({98}));
    for (long v : {one.min, one.median, one.max, one.mean}) EXPECT_EQ(fmt(v), "9.80");
    EXPECT_EQ(fmt(one.stdev), "0.00");
    EXPECT_EQ(fmt(cvss_stats(scores({50, 50, 50})).stdev), "0.00");
    EXPECT_EQ(code_of([] { cvss_stats(std::span<const CvssScore>{}); }), ErrorCode::EmptyInput);
}

// Half-up rounding of mean and stdev against an exact integer computation.
TEST(Cvss, RoundingMatchesBruteForce) {
    std::mt19937 rng(9);
    for (int instance = 0; instance < 500; ++instance) {
        std::vector<int> tenths(1 + rng() % 12);
        for (int& t : tenths) t = static_cast<int>(rng() % 101);
        std::vector<CvssScore> values;
        for (int t : tenths) values.push_back(CvssScore::from_tenths(t));
        const auto s = cvss_stats(values);

        const long n = static_cast<long>(tenths.size());
        const long sum = std::accumulate(tenths.begin(), tenths.end(), 0L);
        // mean in hundredths = 10*sum/n, half-up: floor((20*sum + n) / (2n))
        EXPECT_EQ(s.mean, (20 * sum + n) / (2 * n));
        // variance in tenths^2 = (n*sumsq - sum^2)/n^2; stdev hundredths = 10*sqrt(var)
        long sumsq = 0;
        for (int t : tenths) sumsq += static_cast<long>(t) * t;
        const long num = 100 * (n * sumsq - sum * sum);  // (100 * var) * n^2, var in tenths^2
        long h = 0;
        while ((2 * h + 1) * (2 * h + 1) * n * n <= 4 * num) ++h;
        EXPECT_EQ(s.stdev, h);

        std::sort(tenths.begin(), tenths.end());
        EXPECT_EQ(s.min, tenths.front() * 10L);
        EXPECT_EQ(s.max, tenths.back() * 10L);
        const long med = tenths.size() % 2 ? tenths[tenths.size() / 2] * 10L
                                           : (tenths[tenths.size() / 2 - 1] + tenths[tenths.size() / 2]) * 5L;
        EXPECT_EQ(s.median, med);
        EXPECT_LE(s.min, s.median);
        EXPECT_LE(s.median, s.max);

        auto shuffled = values;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_EQ(cvss_stats(shuffled), s);
    }
}

TEST(Distribution, EmptyAndPartition) {
    const auto empty = conflict_distribution(std::span<const ConflictReport>{});
    EXPECT_EQ(empty.total, 0u);
    EXPECT_EQ(empty.percent(ScenarioKind::AutoFinal), "0.0");
    std::vector<ConflictReport> reports(7);
    reports[1].scenario.kind = ScenarioKind::ChooseOne;
    reports[2].scenario.kind = ScenarioKind::ChooseFromUnion;
    reports[3].scenario.kind = ScenarioKind::ChooseFromUnion;
    const auto d = conflict_distribution(reports);
    EXPECT_EQ(d.count(ScenarioKind::AutoFinal) + d.count(ScenarioKind::ChooseOne) +
                  d.count(ScenarioKind::ChooseFromUnion),
              d.total);
    EXPECT_EQ(d.percent(ScenarioKind::ChooseFromUnion), "28.6");
}

class ReplicationStats : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        static Project project = lcw::testing::replicated_project();
        stats_ = new ProjectStats(compute_stats(project.snapshot()));
    }
    static void TearDownTestSuite() {
        delete stats_;
        stats_ = nullptr;
    }
    static ProjectStats* stats_;
};

ProjectStats* ReplicationStats::stats_ = nullptr;

TEST_F(ReplicationStats, ScenarioDistribution) {
    const auto& d = stats_->scenarios;
    EXPECT_EQ(d.total, 256u);
    EXPECT_EQ(d.count(ScenarioKind::AutoFinal), 148u);
    EXPECT_EQ(d.count(ScenarioKind::ChooseOne), 4u);
    EXPECT_EQ(d.count(ScenarioKind::ChooseFromUnion), 104u);
    EXPECT_EQ(d.percent(ScenarioKind::AutoFinal), "57.8");
    EXPECT_EQ(d.percent(ScenarioKind::ChooseOne), "1.6");
    EXPECT_EQ(d.percent(ScenarioKind::ChooseFromUnion), "40.6");
}

TEST_F(ReplicationStats, Kappa) {
    ASSERT_TRUE(stats_->agreement.kappa.has_value());
    EXPECT_NEAR(*stats_->agreement.kappa, 0.381599, 1e-6);
    EXPECT_EQ(stats_->agreement.reduced_pairs.size(), 256u);
}

TEST_F(ReplicationStats, CategoryCounts) {
    const std::vector<std::pair<Topic, std::size_t>> expected{
        {Topic::Internet, 135},           {Topic::Database, 30},   {Topic::TextProcessing, 21},
        {Topic::Security, 19},            {Topic::SoftwareDevelopment, 14}, {Topic::Multimedia, 13},
        {Topic::System, 13},              {Topic::Utilities, 6},   {Topic::Communications, 2},
        {Topic::ScientificEngineering, 2}, {Topic::TextEditors, 1}};
    for (const auto& [t, n] : expected) EXPECT_EQ(stats_->categories[index_of(t)], n) << name_of(t);
    EXPECT_EQ(std::count(stats_->categories.begin(), stats_->categories.end(), 0u), 13);
    EXPECT_EQ(std::accumulate(stats_->categories.begin(), stats_->categories.end(), std::size_t{0}), 256u);
}

TEST_F(ReplicationStats, CategoryCvssRows) {
    struct Row {
        Topic t;
        std::size_t n;
        const char *min, *med, *max, *avg, *sd;
    };
    const std::vector<Row> table{
        {Topic::Internet, 135, "4.70", "7.50", "10.00", "8.04", "1.29"},
        {Topic::Database, 30, "5.90", "9.10", "9.80", "8.66", "1.15"},
        {Topic::TextProcessing, 21, "5.30", "8.50", "9.80", "8.03", "1.49"},
        {Topic::Security, 19, "5.30", "8.45", "9.90", "8.19", "1.39"},
        {Topic::SoftwareDevelopment, 14, "5.50", "7.50", "9.80", "8.11", "1.32"},
        {Topic::Multimedia, 13, "6.50", "6.50", "10.00", "7.33", "1.14"},
        {Topic::System, 13, "5.90", "9.00", "10.00", "8.70", "1.25"},
        {Topic::Utilities, 6, "7.50", "8.10", "9.80", "8.40", "0.63"},
        {Topic::Communications, 2, "6.80", "7.95", "9.10", "7.95", "1.15"},
        {Topic::ScientificEngineering, 2, "5.30", "7.50", "9.80", "7.53", "1.84"},
        {Topic::TextEditors, 1, "9.80", "9.80", "9.80", "9.80", "0.00"},
    };
    ASSERT_EQ(stats_->category_cvss.size(), table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& got = stats_->category_cvss[i];
        const auto& want = table[i];
        EXPECT_EQ(got.category, want.t);
        EXPECT_EQ(got.libraries, want.n);
        ASSERT_TRUE(got.cvss.has_value());
        EXPECT_EQ(fmt(got.cvss->min), want.min) << name_of(want.t);
        EXPECT_EQ(fmt(got.cvss->median), want.med) << name_of(want.t);
        EXPECT_EQ(fmt(got.cvss->max), want.max) << name_of(want.t);
        EXPECT_EQ(fmt(got.cvss->mean), want.avg) << name_of(want.t);
        EXPECT_EQ(fmt(got.cvss->stdev), want.sd) << name_of(want.t);
    }
}

TEST_F(ReplicationStats, ClassCvssRows) {
    ASSERT_EQ(stats_->class_cvss.size(), 2u);
    const auto& remote = stats_->class_cvss[0];
    const auto& local = stats_->class_cvss[1];
    EXPECT_EQ(remote.cls, NetworkClass::RemoteNetwork);
    EXPECT_EQ(remote.libraries, 211u);
    ASSERT_TRUE(remote.cvss && local.cvss);
    EXPECT_EQ(fmt(remote.cvss->min), "4.70");
    EXPECT_EQ(fmt(remote.cvss->median), "8.10");
    EXPECT_EQ(fmt(remote.cvss->max), "10.00");
    EXPECT_EQ(fmt(remote.cvss->mean), "8.22");
    EXPECT_EQ(fmt(remote.cvss->stdev), "1.24");
    EXPECT_EQ(local.cls, NetworkClass::Local);
    EXPECT_EQ(fmt(local.cvss->min), "5.30");
    EXPECT_EQ(fmt(local.cvss->median), "7.50");
    EXPECT_EQ(fmt(local.cvss->max), "10.00");
    EXPECT_EQ(fmt(local.cvss->mean), "7.92");
    EXPECT_EQ(fmt(local.cvss->stdev), "1.46");
    EXPECT_EQ(remote.libraries + local.libraries, 256u);
}

TEST_F(ReplicationStats, CveCountsAndDiscrepancyReport) {
    EXPECT_EQ(stats_->cves, 434u);
    EXPECT_EQ(stats_->cves_below_floor, 65u);
    EXPECT_TRUE(class_count_discrepancies(*stats_, {{NetworkClass::RemoteNetwork, 211}, {NetworkClass::Local, 45}})
                    .empty());
    const auto reference = class_count_discrepancies(*stats_, {{NetworkClass::RemoteNetwork, 211}, {NetworkClass::Local, 48}});
    ASSERT_EQ(reference.size(), 2u);
    EXPECT_EQ(reference[0], "class Local: computed 45 libraries, reference 48");
    EXPECT_EQ(reference[1], "reference class counts sum to 259 but 256 libraries are categorised");
    const std::string report = render_report(*stats_);
    EXPECT_NE(report.find("Fleiss kappa: 0.381599 (fair agreement)"), std::string::npos);
    const std::string csv = report_csv(*stats_);
    EXPECT_EQ(csv.rfind("section,name,count,percent,min,median,max,avg,stdev,value\n", 0), 0u);
}
