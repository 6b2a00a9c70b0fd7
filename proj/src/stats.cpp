#include "lcw/stats.hpp"

#include "lcw/dataset.hpp"
#include "lcw/error.hpp"
#include "lcw/csv.hpp"
#include "lcw/rational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lcw {

namespace {

bool contains(std::span<const Topic> set, Topic t) { return std::find(set.begin(), set.end(), t) != set.end(); }

std::string fixed(double value, int places) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(places);
    out << value;
    return out.str();
}

}  // namespace

std::pair<Topic, Topic> reduce_pair(std::span<const Topic> a, std::span<const Topic> b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyEntry, "pair reduction needs two non-empty choices");
    for (const Topic x : a)
        if (contains(b, x)) return {x, x};
    return {a.front(), b.front()};
}

double fleiss_kappa(std::span<const std::vector<Topic>> items) {
    if (items.empty()) throw Error(ErrorCode::EmptyInput, "no items to rate");
    const std::size_t raters = items.front().size();
    if (raters < 2) throw Error(ErrorCode::InvalidArgument, "Fleiss' kappa needs at least two ratings per item");
    std::array<std::uint64_t, kTopicCount> totals{};
    std::uint64_t agreement_sum = 0;  // sum over items and categories of n_ij^2
    for (const auto& item : items) {
        if (item.size() != raters)
            throw Error(ErrorCode::InvalidArgument, "every item needs the same number of ratings");
        std::array<std::uint64_t, kTopicCount> counts{};
        for (const Topic t : item) ++counts[index_of(t)];
        for (std::size_t j = 0; j < kTopicCount; ++j) {
            agreement_sum += counts[j] * counts[j];
            totals[j] += counts[j];
        }
    }
    const auto n_items = static_cast<std::uint64_t>(items.size());
    const std::uint64_t ratings = n_items * raters;
    std::uint64_t squares = 0;
    for (const auto c : totals) squares += c * c;
    if (squares == ratings * ratings)
        throw Error(ErrorCode::DegenerateAgreement, "all ratings fall in one category; kappa is undefined");

    const long double p_bar = static_cast<long double>(agreement_sum - ratings) /
                              static_cast<long double>(ratings * (raters - 1));
    const long double p_e = static_cast<long double>(squares) / (static_cast<long double>(ratings) * ratings);
    return static_cast<double>((p_bar - p_e) / (1.0L - p_e));
}

double fleiss_kappa(std::span<const std::pair<Topic, Topic>> items) {
    std::vector<std::vector<Topic>> expanded;
    expanded.reserve(items.size());
    for (const auto& [a, b] : items) expanded.push_back({a, b});
    return fleiss_kappa(std::span<const std::vector<Topic>>(expanded));
}

std::string_view landis_koch_band(double kappa) noexcept {
    if (kappa < 0) return "poor";
    if (kappa <= 0.20) return "slight";
    if (kappa <= 0.40) return "fair";
    if (kappa <= 0.60) return "moderate";
    if (kappa <= 0.80) return "substantial";
    return "almost perfect";
}

AgreementReport agreement(const ProjectData& project) {
    AgreementReport report;
    const auto assessors = project.assessor_ids();
    std::vector<std::vector<Topic>> items;
    for (const auto& rec : project.libraries) {
        std::vector<const Assessment*> entries;
        for (const auto& id : assessors) {
            const Assessment* a = rec.assessment_of(id);
            if (a && a->done) entries.push_back(a);
        }
        if (entries.size() < 2 || entries.size() != assessors.size()) continue;
        if (entries.size() == 2) {
            const auto pair = reduce_pair(entries[0]->choices, entries[1]->choices);
            report.reduced_pairs.push_back(pair);
            items.push_back({pair.first, pair.second});
        } else {
            std::vector<Topic> item;
            for (const Assessment* a : entries) item.push_back(a->choices.front());
            items.push_back(std::move(item));
        }
    }
    TopicMask used;
    for (const auto& item : items) used |= mask_of(item);
    report.category_universe = topics_in(used);
    if (items.empty()) return report;
    try {
        report.kappa = fleiss_kappa(std::span<const std::vector<Topic>>(items));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateAgreement) throw;
        report.degenerate = true;
    }
    return report;
}

std::string ScenarioCounts::percent(ScenarioKind kind) const {
    if (total == 0) return "0.0";
    return to_decimal_string(Rational(static_cast<std::int64_t>(100 * count(kind)), static_cast<std::int64_t>(total)),
                             1);
}

ScenarioCounts conflict_distribution(std::span<const ConflictReport> reports) {
    ScenarioCounts out;
    for (const auto& r : reports) ++out.counts[static_cast<std::size_t>(r.scenario.kind)];
    out.total = reports.size();
    return out;
}

CategoryCounts category_counts(std::span<const DatasetRow> rows) {
    CategoryCounts counts{};
    for (const auto& row : rows)
        if (row.final_category) ++counts[index_of(*row.final_category)];
    return counts;
}

std::string CvssSummary::format(long hundredths) {
    std::string frac = std::to_string(hundredths % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return std::to_string(hundredths / 100) + "." + frac;
}

CvssSummary cvss_stats(std::span<const CvssScore> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "no CVSS values");
    std::vector<long> tenths;
    tenths.reserve(values.size());
    for (const auto& v : values) tenths.push_back(v.tenths());
    std::sort(tenths.begin(), tenths.end());

    const auto n = static_cast<long>(tenths.size());
    const long sum = std::accumulate(tenths.begin(), tenths.end(), 0L);
    __int128 squares = 0;
    for (const long t : tenths) squares += static_cast<__int128>(t) * t;

    CvssSummary s;
    s.n = tenths.size();
    s.min = tenths.front() * 10;
    s.max = tenths.back() * 10;
    s.median = n % 2 ? tenths[n / 2] * 10 : (tenths[n / 2 - 1] + tenths[n / 2]) * 5;
    // mean in hundredths is 10*sum/n; half-up rounding
    s.mean = (20 * sum + n) / (2 * n);

    // population variance in tenths^2 is v / n^2
    const __int128 v = static_cast<__int128>(n) * squares - static_cast<__int128>(sum) * sum;
    long k = std::lround(10.0 * std::sqrt(static_cast<double>(v)) / static_cast<double>(n));
    auto fits = [&](long c) {  // c - 1/2 <= 10*sqrt(v)/n
        if (c <= 0) return true;
        const __int128 lhs = static_cast<__int128>(2 * c - 1) * (2 * c - 1) * n * n;
        return lhs <= 400 * v;
    };
    while (!fits(k)) --k;
    while (fits(k + 1)) ++k;
    s.stdev = k;

    s.mean_exact = static_cast<double>(sum) / static_cast<double>(n) / 10.0;
    s.stdev_exact = std::sqrt(static_cast<double>(v)) / static_cast<double>(n) / 10.0;
    return s;
}

ProjectStats compute_stats(const ProjectData& project) {
    ProjectStats st;
    st.libraries = project.libraries.size();
    st.severity_floor = project.config.severity_floor;
    const auto rows = dataset_rows(project);

    std::vector<ConflictReport> reports;
    for (const auto& rec : project.libraries)
        if (rec.report) reports.push_back(*rec.report);
    st.scenarios = conflict_distribution(reports);
    st.agreement = agreement(project);
    st.categories = category_counts(rows);

    std::array<std::vector<CvssScore>, kTopicCount> by_category;
    std::array<std::vector<CvssScore>, 2> by_class;
    std::array<std::size_t, 2> class_libraries{};
    for (const auto& rec : project.libraries) {
        st.cves += rec.vulnerabilities.size();
        for (const auto& v : rec.vulnerabilities)
            if (v.cvss_nvd && *v.cvss_nvd < st.severity_floor) ++st.cves_below_floor;
        if (!rec.final_category) continue;
        ++st.finalized;
        const auto cls = static_cast<std::size_t>(*final_class(rec, project.config.partition));
        ++class_libraries[cls];
        for (const auto& v : rec.vulnerabilities) {
            if (!v.cvss_nvd) continue;
            by_category[index_of(*rec.final_category)].push_back(*v.cvss_nvd);
            by_class[cls].push_back(*v.cvss_nvd);
        }
    }

    for (const auto& info : list_topics()) {
        const std::size_t count = st.categories[index_of(info.topic)];
        if (count == 0) continue;
        const auto& values = by_category[index_of(info.topic)];
        st.category_cvss.push_back(
            {info.topic, count, values.empty() ? std::nullopt : std::optional(cvss_stats(values))});
    }
    std::stable_sort(st.category_cvss.begin(), st.category_cvss.end(),
                     [](const CategoryCvssRow& a, const CategoryCvssRow& b) { return a.libraries > b.libraries; });

    for (const NetworkClass cls : {NetworkClass::RemoteNetwork, NetworkClass::Local}) {
        const auto i = static_cast<std::size_t>(cls);
        if (class_libraries[i] == 0) continue;
        st.class_cvss.push_back({cls, class_libraries[i],
                                 by_class[i].empty() ? std::nullopt : std::optional(cvss_stats(by_class[i]))});
    }
    return st;
}

std::vector<std::string> class_count_discrepancies(const ProjectStats& stats,
                                                   const std::map<NetworkClass, std::size_t>& reference) {
    std::vector<std::string> out;
    std::size_t reference_total = 0;
    for (const auto& [cls, expected] : reference) {
        reference_total += expected;
        std::size_t actual = 0;
        for (const auto& row : stats.class_cvss)
            if (row.cls == cls) actual = row.libraries;
        if (actual != expected)
            out.push_back("class " + std::string(to_string(cls)) + ": computed " + std::to_string(actual) +
                          " libraries, reference " + std::to_string(expected));
    }
    if (!reference.empty() && reference.size() == 2 && reference_total != stats.finalized)
        out.push_back("reference class counts sum to " + std::to_string(reference_total) + " but " +
                      std::to_string(stats.finalized) + " libraries are categorised");
    return out;
}

std::string render_report(const ProjectStats& st) {
    std::ostringstream out;
    out << "libraries: " << st.libraries << "\n";
    out << "finalized: " << st.finalized << "\n";
    for (const ScenarioKind kind : {ScenarioKind::AutoFinal, ScenarioKind::ChooseOne, ScenarioKind::ChooseFromUnion})
        out << "scenario " << to_string(kind) << ": " << st.scenarios.count(kind) << " ("
            << st.scenarios.percent(kind) << "%)\n";
    if (st.agreement.kappa)
        out << "Fleiss kappa: " << fixed(*st.agreement.kappa, 6) << " (" << landis_koch_band(*st.agreement.kappa)
            << " agreement)\n";
    else if (st.agreement.degenerate)
        out << "Fleiss kappa: undefined (degenerate agreement)\n";
    else
        out << "Fleiss kappa: n/a\n";
    out << "CVEs: " << st.cves << " (" << st.cves_below_floor << " below " << st.severity_floor.to_string() << ")\n";

    std::size_t zero = 0;
    out << "categories:\n";
    for (const auto& info : list_topics()) {
        const auto count = st.categories[index_of(info.topic)];
        if (count == 0) ++zero;
        out << "  " << info.name << ": " << count << "\n";
    }
    out << "topics without libraries: " << zero << "\n";

    auto summary = [&](const std::optional<CvssSummary>& s) {
        if (!s) return std::string("n/a");
        return CvssSummary::format(s->min) + " " + CvssSummary::format(s->median) + " " +
               CvssSummary::format(s->max) + " " + CvssSummary::format(s->mean) + " " +
               CvssSummary::format(s->stdev);
    };
    out << "cvss (min median max avg stdev):\n";
    for (const auto& row : st.category_cvss)
        out << "  " << name_of(row.category) << " [" << row.libraries << "]: " << summary(row.cvss) << "\n";
    for (const auto& row : st.class_cvss)
        out << "  class " << to_string(row.cls) << " [" << row.libraries << "]: " << summary(row.cvss) << "\n";
    return out.str();
}

std::string report_csv(const ProjectStats& st) {
    std::string out;
    const std::vector<std::string> header{"section", "name", "count", "percent", "min",
                                          "median",  "max",  "avg",   "stdev",   "value"};
    csv::append_row(out, header);
    auto row = [&](std::vector<std::string> fields) {
        fields.resize(header.size());
        csv::append_row(out, fields);
    };
    auto with_cvss = [&](std::string section, std::string name, std::size_t count,
                         const std::optional<CvssSummary>& s) {
        if (!s) return row({std::move(section), std::move(name), std::to_string(count)});
        row({std::move(section), std::move(name), std::to_string(count), "", CvssSummary::format(s->min),
             CvssSummary::format(s->median), CvssSummary::format(s->max), CvssSummary::format(s->mean),
             CvssSummary::format(s->stdev)});
    };

    for (const auto& info : list_topics())
        row({"category", std::string(info.name), std::to_string(st.categories[index_of(info.topic)])});
    for (const ScenarioKind kind : {ScenarioKind::AutoFinal, ScenarioKind::ChooseOne, ScenarioKind::ChooseFromUnion})
        row({"scenario", std::string(to_string(kind)), std::to_string(st.scenarios.count(kind)),
             st.scenarios.percent(kind)});
    for (const auto& r : st.category_cvss) with_cvss("cvss_category", std::string(name_of(r.category)), r.libraries, r.cvss);
    for (const auto& r : st.class_cvss) with_cvss("cvss_class", std::string(to_string(r.cls)), r.libraries, r.cvss);
    row({"kappa", "fleiss", std::to_string(st.agreement.reduced_pairs.size()), "", "", "", "", "", "",
         st.agreement.kappa ? fixed(*st.agreement.kappa, 6) : std::string()});
    row({"cves", "total", std::to_string(st.cves)});
    row({"cves", "below_floor", std::to_string(st.cves_below_floor)});
    return out;
}

}  // namespace lcw
