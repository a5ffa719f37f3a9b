#include "drf/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "drf/error.hpp"

namespace drf {

std::vector<SurvivalRecord> impute_censored(const std::vector<SurvivalRecord>& records) {
    if (records.empty()) throw ArgumentError("impute_censored: empty record list");

    std::vector<double> death_times;
    for (const auto& r : records)
        if (r.event == 1) death_times.push_back(r.time_days);
    std::sort(death_times.begin(), death_times.end());

    std::vector<SurvivalRecord> out = records;
    for (auto& r : out) {
        if (r.event != 0) continue;
        // Mean of deaths at or after the censoring time; none -> keep own time.
        auto it = std::lower_bound(death_times.begin(), death_times.end(), r.time_days);
        if (it == death_times.end()) continue;
        const double sum = std::accumulate(it, death_times.end(), 0.0);
        r.time_days = sum / static_cast<double>(death_times.end() - it);
    }
    return out;
}

MedianSplit median_split(const std::vector<double>& values) {
    if (values.size() < 2) throw ArgumentError("median_split: need at least 2 values");

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double threshold =
        (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    MedianSplit split;
    split.threshold = threshold;
    split.labels.reserve(n);
    std::size_t lo = 0, hi = 0;
    for (double v : values) {
        const bool high = v >= threshold;
        split.labels.push_back(high ? SplitLabel::high : SplitLabel::low);
        (high ? hi : lo)++;
    }
    split.degenerate = (lo == 0 || hi == 0);
    return split;
}

KmCurve km_estimate(const std::vector<SurvivalRecord>& records) {
    if (records.empty()) throw ArgumentError("km_estimate: empty record list");

    // Sort by time; at equal times deaths are processed before censorings so
    // a subject censored at an event time stays in that event's risk set.
    std::vector<const SurvivalRecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& r : records) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        if (a->time_days != b->time_days) return a->time_days < b->time_days;
        return a->event > b->event;
    });

    KmCurve curve;
    double survival = 1.0;
    std::size_t at_risk = sorted.size();
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double t = sorted[i]->time_days;
        std::size_t deaths = 0, leaving = 0;
        while (i < sorted.size() && sorted[i]->time_days == t) {
            deaths += (sorted[i]->event == 1);
            ++leaving;
            ++i;
        }
        if (deaths > 0) {
            survival *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
            curve.points.push_back({t, survival, at_risk});
            if (!curve.median_survival && survival <= 0.5) curve.median_survival = t;
        }
        at_risk -= leaving;
    }
    return curve;
}

double chi2_pvalue_1df(double chi2) {
    if (chi2 <= 0.0) return 1.0;
    // erfc underflows to 0 near chi2 ~ 1500; keep p strictly positive
    return std::max(std::erfc(std::sqrt(chi2 * 0.5)),
                    std::numeric_limits<double>::denorm_min());
}

LogRankResult logrank_test(const std::vector<SurvivalRecord>& group_a,
                           const std::vector<SurvivalRecord>& group_b) {
    if (group_a.empty() || group_b.empty())
        throw ArgumentError("logrank_test: both groups must be non-empty");

    struct Entry {
        double time;
        int event;
        int group;
    };
    std::vector<Entry> entries;
    entries.reserve(group_a.size() + group_b.size());
    for (const auto& r : group_a) entries.push_back({r.time_days, r.event, 0});
    for (const auto& r : group_b) entries.push_back({r.time_days, r.event, 1});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.event > b.event;
    });

    double observed_a = 0.0, expected_a = 0.0, variance = 0.0;
    double total_deaths = 0.0;
    std::size_t risk_a = group_a.size();
    std::size_t risk_b = group_b.size();

    std::size_t i = 0;
    while (i < entries.size()) {
        const double t = entries[i].time;
        std::size_t deaths_a = 0, deaths_total = 0, leaving_a = 0, leaving_b = 0;
        while (i < entries.size() && entries[i].time == t) {
            if (entries[i].event == 1) {
                ++deaths_total;
                if (entries[i].group == 0) ++deaths_a;
            }
            (entries[i].group == 0 ? leaving_a : leaving_b)++;
            ++i;
        }
        const double n = static_cast<double>(risk_a + risk_b);
        if (deaths_total > 0 && n > 0) {
            const double na = static_cast<double>(risk_a);
            const double d = static_cast<double>(deaths_total);
            observed_a += static_cast<double>(deaths_a);
            expected_a += d * na / n;
            if (n > 1.0)
                variance += d * (na / n) * (1.0 - na / n) * (n - d) / (n - 1.0);
            total_deaths += d;
        }
        risk_a -= leaving_a;
        risk_b -= leaving_b;
    }

    LogRankResult res;
    if (variance <= 0.0) {
        res.chi2 = 0.0;
        res.p_value = 1.0;
        res.hr_defined = false;
        return res;
    }
    const double diff = observed_a - expected_a;
    res.chi2 = diff * diff / variance;
    res.p_value = chi2_pvalue_1df(res.chi2);

    const double observed_b = total_deaths - observed_a;
    const double expected_b = total_deaths - expected_a;
    if (observed_a > 0.0 && observed_b > 0.0 && expected_a > 0.0 && expected_b > 0.0) {
        res.hazard_ratio = (observed_a / expected_a) / (observed_b / expected_b);
        const double se = std::sqrt(1.0 / expected_a + 1.0 / expected_b);
        res.ci_low = res.hazard_ratio * std::exp(-1.96 * se);
        res.ci_high = res.hazard_ratio * std::exp(1.96 * se);
        res.hr_defined = true;
    } else {
        res.hazard_ratio = 1.0;
        res.ci_low = 1.0;
        res.ci_high = 1.0;
        res.hr_defined = false;
    }
    return res;
}

std::vector<double> holm_bonferroni(const std::vector<double>& p_values) {
    const std::size_t m = p_values.size();
    for (double p : p_values)
        if (p < 0.0 || p > 1.0) throw ArgumentError("holm_bonferroni: p outside [0, 1]");

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    std::vector<double> adjusted(m, 0.0);
    double running_max = 0.0;
    for (std::size_t rank = 0; rank < m; ++rank) {
        const double scaled =
            std::min(1.0, static_cast<double>(m - rank) * p_values[order[rank]]);
        running_max = std::max(running_max, scaled);
        adjusted[order[rank]] = running_max;
    }
    return adjusted;
}

ScreeningTable feature_screen(const std::vector<std::vector<double>>& columns,
                              const std::vector<std::string>& kinds,
                              const std::vector<std::string>& names,
                              const std::vector<SurvivalRecord>& records) {
    if (columns.size() != kinds.size() || columns.size() != names.size())
        throw ArgumentError("feature_screen: column metadata length mismatch");
    if (records.size() < 2) throw ArgumentError("feature_screen: need at least 2 records");

    ScreeningTable table;
    std::vector<double> raw_p;
    raw_p.reserve(columns.size());

    for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto& col = columns[c];
        if (col.size() != records.size())
            throw ArgumentError("feature_screen: column " + names[c] + " length mismatch");

        ScreenRow row;
        row.kind = kinds[c];
        row.feature = names[c];

        const MedianSplit split = median_split(col);
        if (split.degenerate) {
            row.raw_p = 1.0;
            row.degenerate = true;
        } else {
            std::vector<SurvivalRecord> low, high;
            for (std::size_t i = 0; i < records.size(); ++i)
                (split.labels[i] == SplitLabel::low ? low : high).push_back(records[i]);
            row.raw_p = logrank_test(low, high).p_value;
        }
        raw_p.push_back(row.raw_p);
        table.rows.push_back(std::move(row));
    }

    const auto holm = holm_bonferroni(raw_p);
    for (std::size_t c = 0; c < table.rows.size(); ++c) {
        auto& row = table.rows[c];
        row.holm_p = holm[c];
        row.neg_log10_p = row.raw_p > 0.0 ? -std::log10(row.raw_p) : 308.0;
        row.significant = row.holm_p < 0.05;
    }
    return table;
}

std::vector<SurvivalRecord> records_from_manifest(const CohortManifest& manifest) {
    std::vector<SurvivalRecord> out;
    out.reserve(manifest.rows.size());
    for (const auto& r : manifest.rows) out.push_back({r.patient_id, r.survival_days, r.event});
    return out;
}

} // namespace drf
