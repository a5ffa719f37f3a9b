// drfkit: deep-radiomic survival pipeline driver.
//
// Subcommands: synth (build a synthetic cohort), extract (SRF/DRF feature
// table), screen (univariate log-rank screen), classify (random-forest
// cross-validation), run-all (extract + screen + classify).

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "drf/error.hpp"
#include "drf/pipeline.hpp"
#include "drf/synthetic.hpp"
#include "drf/version.hpp"

namespace {

struct CommonOpts {
    std::string manifest;
    std::string weights;
    std::string config_file;
    std::string out = "drf_out";
    std::uint64_t seed = 0;
    int folds = 5;
    int trees = 500;
    int input_size = 256;
    int jobs = 1;
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts, bool needs_manifest) {
    auto* m = cmd->add_option("--manifest", opts.manifest, "Cohort manifest CSV");
    if (needs_manifest) m->check(CLI::ExistingFile);
    cmd->add_option("--weights", opts.weights, "Network weight file (omit for seeded fallback)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--config", opts.config_file, "key=value config file, overridden by flags")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "Master seed recorded in every output");
    cmd->add_option("--out", opts.out, "Output directory");
    cmd->add_option("--folds", opts.folds, "Cross-validation folds");
    cmd->add_option("--trees", opts.trees, "Trees per forest");
    cmd->add_option("--input-size", opts.input_size, "Cubic network input size in voxels");
    cmd->add_option("--jobs", opts.jobs, "Worker threads for per-patient extraction");
}

drf::RunConfig build_config(const CommonOpts& opts, const CLI::App* cmd) {
    drf::RunConfig cfg;
    if (!opts.config_file.empty()) cfg = drf::load_config_file(opts.config_file);

    // Flags given on the command line override the config file.
    if (cmd->count("--manifest")) cfg.manifest_path = opts.manifest;
    if (cmd->count("--weights")) cfg.weights_path = opts.weights;
    if (cmd->count("--seed")) cfg.seed = opts.seed;
    if (cmd->count("--out")) cfg.out_dir = opts.out;
    if (cmd->count("--folds")) cfg.folds = opts.folds;
    if (cmd->count("--trees")) cfg.n_trees = opts.trees;
    if (cmd->count("--jobs")) cfg.jobs = opts.jobs;
    if (cmd->count("--input-size"))
        cfg.input_dims = {opts.input_size, opts.input_size, opts.input_size};
    if (cfg.out_dir.empty()) cfg.out_dir = opts.out;
    return cfg;
}

int report_extraction(const drf::ExtractionResult& extraction) {
    if (!extraction.errors.empty()) {
        std::cerr << extraction.errors.size() << " patient(s) failed extraction (see errors.csv)\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deep radiomic feature extraction and survival analysis"};
    app.set_version_flag("--version", drf::kVersion);
    app.require_subcommand(1);

    CommonOpts opts;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort with a planted texture-survival link");
    drf::SynthSpec synth_spec;
    std::string synth_out = "synth_cohort";
    int synth_dim = 64;
    synth->add_option("--out", synth_out, "Cohort directory");
    synth->add_option("--seed", synth_spec.seed, "Generator seed");
    synth->add_option("--patients", synth_spec.n_patients, "Cohort size");
    synth->add_option("--dims", synth_dim, "Cubic volume size in voxels");
    synth->add_option("--scale-a", synth_spec.class_a_scale, "Class A field correlation length");
    synth->add_option("--scale-b", synth_spec.class_b_scale, "Class B field correlation length");
    synth->add_option("--median-a", synth_spec.class_a_median_days, "Class A survival median (days)");
    synth->add_option("--median-b", synth_spec.class_b_median_days, "Class B survival median (days)");
    synth->add_option("--censor", synth_spec.censoring_fraction, "Fraction of censored patients");

    // extract
    auto* extract = app.add_subcommand("extract", "Compute the SRF/DRF feature table for a cohort");
    add_common_flags(extract, opts, true);

    // screen
    auto* screen = app.add_subcommand("screen", "Univariate survival screen of an extracted feature table");
    add_common_flags(screen, opts, true);
    std::string features_csv;
    screen->add_option("--features", features_csv, "features.csv from extract")
        ->check(CLI::ExistingFile);

    // classify
    auto* classify = app.add_subcommand("classify", "Random-forest survival-group classification");
    add_common_flags(classify, opts, true);
    classify->add_option("--features", features_csv, "features.csv from extract")
        ->check(CLI::ExistingFile);

    // run-all
    auto* run_all_cmd = app.add_subcommand("run-all", "Extract, screen and classify in one run");
    add_common_flags(run_all_cmd, opts, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            synth_spec.dims = {synth_dim, synth_dim, synth_dim};
            const auto result = drf::generate_synthetic_cohort(synth_spec, synth_out);
            std::cout << "manifest: " << result.manifest_path.string() << '\n';
            return 0;
        }

        if (extract->parsed()) {
            const auto cfg = build_config(opts, extract);
            const auto result = drf::extract_cohort_features(cfg);
            std::filesystem::create_directories(cfg.out_dir);
            drf::write_feature_csv(result.features, cfg.out_dir / "features.csv");
            drf::write_error_ledger(result.errors, cfg.out_dir / "errors.csv");
            drf::write_run_manifest(cfg, cfg.out_dir / "run_manifest.json");
            std::cout << "features: " << (cfg.out_dir / "features.csv").string() << '\n';
            return report_extraction(result);
        }

        if (screen->parsed()) {
            const auto cfg = build_config(opts, screen);
            if (features_csv.empty()) throw drf::ArgumentError("screen requires --features");
            const auto features = drf::read_feature_csv(features_csv);
            const auto manifest = drf::read_manifest(cfg.manifest_path);
            const auto result = drf::run_univariate(features, manifest);
            drf::write_screening_csv(result.table, cfg.out_dir / "screening.csv");
            drf::write_heatmap_csv(result.table, cfg.out_dir / "heatmap.csv");
            for (const auto& cmp : result.significant_km) {
                drf::write_km_csv(cmp.curve_a, cfg.out_dir / ("km_" + cmp.title + "_low.csv"));
                drf::write_km_csv(cmp.curve_b, cfg.out_dir / ("km_" + cmp.title + "_high.csv"));
                drf::write_km_svg(cmp, cfg.out_dir / ("km_" + cmp.title + ".svg"));
            }
            drf::write_run_manifest(cfg, cfg.out_dir / "run_manifest.json");
            std::cout << "screening: " << (cfg.out_dir / "screening.csv").string() << '\n';
            return 0;
        }

        if (classify->parsed()) {
            const auto cfg = build_config(opts, classify);
            if (features_csv.empty()) throw drf::ArgumentError("classify requires --features");
            const auto features = drf::read_feature_csv(features_csv);
            const auto manifest = drf::read_manifest(cfg.manifest_path);
            const auto result = drf::run_classification(features, manifest, cfg);
            drf::write_auc_summary_csv(result, cfg.out_dir / "auc_summary.csv");
            drf::write_comparison_csv(result.comparison, cfg.out_dir / "auc_comparison.csv");
            drf::write_predicted_logrank_csv(result, cfg.out_dir / "logrank_predicted.csv");
            drf::write_predictions_csv(result, cfg.out_dir / "predictions.csv");
            drf::write_importance_csv(result, cfg.out_dir / "importance.csv");
            drf::write_run_manifest(cfg, cfg.out_dir / "run_manifest.json");
            std::cout << "auc summary: " << (cfg.out_dir / "auc_summary.csv").string() << '\n';
            return 0;
        }

        if (run_all_cmd->parsed()) {
            const auto cfg = build_config(opts, run_all_cmd);
            const auto result = drf::run_all(cfg);
            std::cout << "DRF mean AUC: " << result.classification.cv_drf.mean_auc << '\n';
            std::cout << "SRF mean AUC: " << result.classification.cv_srf.mean_auc << '\n';
            std::cout << "predicted-group log-rank p (DRF): "
                      << result.classification.km_predicted_drf.logrank.p_value << '\n';
            std::size_t significant = 0;
            for (const auto& row : result.univariate.table.rows) significant += row.significant;
            std::cout << "significant features after Holm: " << significant << '\n';
            std::cout << "outputs: " << cfg.out_dir.string() << '\n';
            return result.exit_code;
        }
    } catch (const drf::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
