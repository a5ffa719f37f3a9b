#pragma once

#include <optional>
#include <string>
#include <vector>

#include "drf/volume_io.hpp"

namespace drf {

struct SurvivalRecord {
    std::string patient_id;
    double time_days = 0.0;
    int event = 0; // 1 = death, 0 = censored at last visit
};

/// Replaces each censored time by the mean time of deaths occurring at or
/// after it; a censored record with no later death keeps its own time. Event
/// flags are preserved (the imputed time only drives class labelling).
std::vector<SurvivalRecord> impute_censored(const std::vector<SurvivalRecord>& records);

enum class SplitLabel : std::uint8_t { low = 0, high = 1 };

struct MedianSplit {
    double threshold = 0.0;
    std::vector<SplitLabel> labels; // low iff value < threshold
    bool degenerate = false;        // one side empty (all values identical)
};

MedianSplit median_split(const std::vector<double>& values);

struct KmPoint {
    double time = 0.0;
    double survival = 1.0;
    std::size_t at_risk = 0;
};

struct KmCurve {
    std::vector<KmPoint> points; // one per distinct event time
    std::optional<double> median_survival;
};

/// Product-limit estimator. Subjects censored at an event time stay in that
/// event's risk set and leave afterwards.
KmCurve km_estimate(const std::vector<SurvivalRecord>& records);

struct LogRankResult {
    double chi2 = 0.0;
    double p_value = 1.0;
    double hazard_ratio = 1.0; // group A over group B, from O/E counts
    double ci_low = 1.0;
    double ci_high = 1.0;
    bool hr_defined = false;
};

/// Two-group log-rank test with O/E hazard ratio and its 95% CI
/// exp(ln HR +/- 1.96 sqrt(1/E_A + 1/E_B)). No events at all gives p = 1 and
/// an undefined (flagged) hazard ratio.
LogRankResult logrank_test(const std::vector<SurvivalRecord>& group_a,
                           const std::vector<SurvivalRecord>& group_b);

/// Step-down Holm-Bonferroni adjustment, input order preserved.
std::vector<double> holm_bonferroni(const std::vector<double>& p_values);

/// Upper tail of the chi-square distribution with 1 degree of freedom.
double chi2_pvalue_1df(double chi2);

struct ScreenRow {
    std::string kind;    // SRF or DRF
    std::string feature; // column name from feature_names()
    double raw_p = 1.0;
    double holm_p = 1.0;
    double neg_log10_p = 0.0;
    bool significant = false; // holm_p < 0.05
    bool degenerate = false;  // median split left one group empty
};

struct ScreeningTable {
    std::vector<ScreenRow> rows;
};

/// Univariate screen: one median split + log-rank test per feature column,
/// Holm correction across all columns. Columns must align with `records`.
ScreeningTable feature_screen(const std::vector<std::vector<double>>& columns,
                              const std::vector<std::string>& kinds,
                              const std::vector<std::string>& names,
                              const std::vector<SurvivalRecord>& records);

/// Survival records straight from a cohort manifest.
std::vector<SurvivalRecord> records_from_manifest(const CohortManifest& manifest);

} // namespace drf
