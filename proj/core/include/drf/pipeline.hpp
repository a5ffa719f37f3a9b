#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drf/conv3d.hpp"
#include "drf/forest.hpp"
#include "drf/survival.hpp"
#include "drf/texture.hpp"
#include "drf/volume_io.hpp"

namespace drf {

struct RunConfig {
    std::filesystem::path manifest_path;
    std::filesystem::path weights_path; // empty -> seeded fallback weights
    Dim3 input_dims{256, 256, 256};
    int gray_levels = 256;
    int matrix_levels = 32;
    int n_trees = 500;
    int folds = 5;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    int jobs = 1;
};

/// Parses `key=value` lines (# comments allowed) into a RunConfig; unknown
/// keys raise ArgumentError. Flags on the CLI override file values.
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

struct PatientFeatures {
    std::string patient_id;
    FeatureVector41 srf{};
    FeatureVector41 drf{};
};

struct ExtractError {
    std::string patient_id;
    std::string message;
};

struct ExtractionResult {
    std::vector<PatientFeatures> features; // manifest order, failed patients removed
    std::vector<ExtractError> errors;
};

/// Per patient: read -> resample to 1 mm -> normalize -> conform -> mask,
/// then SRF on the masked ROI and DRF on the network stacks. A failing
/// patient lands in the error ledger and the run continues.
ExtractionResult extract_cohort_features(const RunConfig& config);

/// Two curves plus their log-rank comparison, ready for CSV/SVG emission.
struct KmComparison {
    std::string title;
    std::string group_a_name;
    std::string group_b_name;
    KmCurve curve_a;
    KmCurve curve_b;
    LogRankResult logrank;
};

struct UnivariateResult {
    ScreeningTable table; // exactly 2 * 41 rows
    std::vector<KmComparison> significant_km;
};

/// 82-column screen (41 SRF + 41 DRF) with Holm correction; emits the KM
/// pair for every significant feature. Throws JoinError when the feature
/// table holds ids missing from the manifest.
UnivariateResult run_univariate(const std::vector<PatientFeatures>& features,
                                const CohortManifest& manifest);

struct ClassificationResult {
    std::vector<std::string> patient_ids;
    std::vector<int> labels; // 1 = long-term survivor (imputed time >= cohort median)
    double label_threshold_days = 0.0;
    CvReport cv_drf;
    CvReport cv_srf;
    ChiSquareComparison comparison;
    ImportanceReport importance;            // over the combined 82 columns
    std::vector<std::string> importance_kind;
    std::vector<std::string> importance_name;
    KmComparison km_predicted_drf; // KM validation of out-of-fold groups
    KmComparison km_predicted_srf;
};

ClassificationResult run_classification(const std::vector<PatientFeatures>& features,
                                        const CohortManifest& manifest, const RunConfig& config);

// --- report emission ------------------------------------------------------

void write_feature_csv(const std::vector<PatientFeatures>& features,
                       const std::filesystem::path& path);
std::vector<PatientFeatures> read_feature_csv(const std::filesystem::path& path);

void write_error_ledger(const std::vector<ExtractError>& errors,
                        const std::filesystem::path& path);

void write_screening_csv(const ScreeningTable& table, const std::filesystem::path& path);
void write_heatmap_csv(const ScreeningTable& table, const std::filesystem::path& path);

void write_km_csv(const KmCurve& curve, const std::filesystem::path& path);
void write_km_svg(const KmComparison& cmp, const std::filesystem::path& path);

void write_auc_summary_csv(const ClassificationResult& result, const std::filesystem::path& path);
void write_comparison_csv(const ChiSquareComparison& cmp, const std::filesystem::path& path);
/// Log-rank numbers of the predicted short/long groups, one row per kind.
void write_predicted_logrank_csv(const ClassificationResult& result,
                                 const std::filesystem::path& path);
void write_predictions_csv(const ClassificationResult& result, const std::filesystem::path& path);
void write_importance_csv(const ClassificationResult& result, const std::filesystem::path& path);

/// JSON run manifest: seed, configuration echo, library version.
void write_run_manifest(const RunConfig& config, const std::filesystem::path& path);

struct RunAllResult {
    ExtractionResult extraction;
    UnivariateResult univariate;
    ClassificationResult classification;
    int exit_code = 0; // 0 clean, 2 partial per-patient failure
};

/// Full study: extract, screen, classify, emit every report under
/// config.out_dir.
RunAllResult run_all(const RunConfig& config);

/// %.17g formatting used by every CSV writer (round-trips doubles).
std::string format_double(double v);

} // namespace drf
