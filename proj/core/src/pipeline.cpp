#include "drf/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "drf/error.hpp"
#include "drf/preprocess.hpp"
#include "drf/rng.hpp"
#include "drf/version.hpp"

namespace drf {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file " + path.string());

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ArgumentError("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "manifest") base.manifest_path = value;
            else if (key == "weights") base.weights_path = value;
            else if (key == "out") base.out_dir = value;
            else if (key == "input_size") {
                const int s = std::stoi(value);
                base.input_dims = {s, s, s};
            } else if (key == "gray_levels") base.gray_levels = std::stoi(value);
            else if (key == "matrix_levels") base.matrix_levels = std::stoi(value);
            else if (key == "trees") base.n_trees = std::stoi(value);
            else if (key == "folds") base.folds = std::stoi(value);
            else if (key == "seed") base.seed = std::stoull(value);
            else if (key == "jobs") base.jobs = std::stoi(value);
            else throw ArgumentError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ArgumentError("config line " + std::to_string(line_no) + ": bad value for '" + key + "'");
        }
    }
    return base;
}

namespace {

struct PatientOutcome {
    bool ok = false;
    PatientFeatures features;
    std::string error;
};

PatientFeatures extract_one(const ManifestRow& row, const CohortManifest& manifest,
                            const NetworkWeights& weights, const RunConfig& config) {
    Volume vol = read_volume(manifest.resolve(row.volume_path));
    const Volume mask_vol = read_volume(manifest.resolve(row.mask_path));
    if (mask_vol.dims != vol.dims)
        throw ShapeError("mask dims differ from volume dims for patient " + row.patient_id);
    RoiMask mask = binarize(mask_vol);

    std::tie(vol, mask) = resample_isotropic(vol, mask, 1.0);
    vol = normalize_gray_levels(vol, config.gray_levels);
    std::tie(vol, mask) = conform(vol, mask, config.input_dims);
    if (mask.count() == 0)
        throw RegionError("ROI is empty after preprocessing for patient " + row.patient_id);
    const Volume masked = apply_mask(vol, mask);

    PatientFeatures out;
    out.patient_id = row.patient_id;
    out.srf = feature_vector(masked, mask, config.matrix_levels);

    const auto [layer1, layer2] = forward_features(masked, weights);
    auto factor_for = [&](const Dim3& stack_dims) {
        const int factor = masked.dims[0] / stack_dims[0];
        for (int a = 0; a < 3; ++a)
            if (stack_dims[a] * factor != masked.dims[a])
                throw ShapeError("feature-map grid does not evenly divide the input");
        return factor;
    };
    const RoiMask mask1 = downsample_mask(mask, factor_for(layer1.dims));
    const RoiMask mask2 = downsample_mask(mask, factor_for(layer2.dims));
    out.drf = compute_drf(layer1, layer2, mask1, mask2, config.matrix_levels);
    return out;
}

NetworkWeights resolve_weights(const RunConfig& config) {
    if (!config.weights_path.empty()) return load_weights(config.weights_path);
    return init_seeded_weights(Rng::mix(config.seed, 0x57454947ULL)); // fallback
}

} // namespace

ExtractionResult extract_cohort_features(const RunConfig& config) {
    const CohortManifest manifest = read_manifest(config.manifest_path);
    const NetworkWeights weights = resolve_weights(config);

    std::vector<PatientOutcome> outcomes(manifest.rows.size());
    const int jobs = std::max(1, config.jobs);

    // Patient-level fan-out: workers claim indices and write to their own
    // slot, so the collected order is the manifest order regardless of jobs.
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= manifest.rows.size()) break;
            try {
                outcomes[i].features = extract_one(manifest.rows[i], manifest, weights, config);
                outcomes[i].ok = true;
            } catch (const std::exception& e) {
                outcomes[i].ok = false;
                outcomes[i].error = e.what();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    ExtractionResult result;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].ok)
            result.features.push_back(std::move(outcomes[i].features));
        else
            result.errors.push_back({manifest.rows[i].patient_id, outcomes[i].error});
    }
    return result;
}

namespace {

/// Survival records aligned with the feature rows; throws JoinError when a
/// feature row has no manifest entry.
std::vector<SurvivalRecord> align_records(const std::vector<PatientFeatures>& features,
                                          const CohortManifest& manifest) {
    std::map<std::string, const ManifestRow*> by_id;
    for (const auto& r : manifest.rows) by_id[r.patient_id] = &r;

    std::vector<SurvivalRecord> records;
    std::string orphans;
    for (const auto& f : features) {
        auto it = by_id.find(f.patient_id);
        if (it == by_id.end()) {
            if (!orphans.empty()) orphans += ", ";
            orphans += f.patient_id;
            continue;
        }
        records.push_back({f.patient_id, it->second->survival_days, it->second->event});
    }
    if (!orphans.empty())
        throw JoinError("feature table ids missing from manifest: " + orphans);
    return records;
}

KmComparison km_compare(const std::string& title, const std::string& name_a,
                        const std::string& name_b, const std::vector<SurvivalRecord>& group_a,
                        const std::vector<SurvivalRecord>& group_b) {
    KmComparison cmp;
    cmp.title = title;
    cmp.group_a_name = name_a;
    cmp.group_b_name = name_b;
    cmp.curve_a = km_estimate(group_a);
    cmp.curve_b = km_estimate(group_b);
    cmp.logrank = logrank_test(group_a, group_b);
    return cmp;
}

} // namespace

UnivariateResult run_univariate(const std::vector<PatientFeatures>& features,
                                const CohortManifest& manifest) {
    if (features.empty()) throw ArgumentError("run_univariate: empty feature table");
    const auto records = align_records(features, manifest);

    const auto& names = feature_names();
    std::vector<std::vector<double>> columns;
    std::vector<std::string> kinds, col_names;
    for (const std::string kind : {"SRF", "DRF"}) {
        for (int f = 0; f < kFeatureCount; ++f) {
            std::vector<double> col;
            col.reserve(features.size());
            for (const auto& row : features)
                col.push_back(kind == "SRF" ? row.srf[f] : row.drf[f]);
            columns.push_back(std::move(col));
            kinds.push_back(kind);
            col_names.push_back(names[f]);
        }
    }

    UnivariateResult result;
    result.table = feature_screen(columns, kinds, col_names, records);

    for (std::size_t c = 0; c < result.table.rows.size(); ++c) {
        const auto& row = result.table.rows[c];
        if (!row.significant || row.degenerate) continue;
        const MedianSplit split = median_split(columns[c]);
        std::vector<SurvivalRecord> low, high;
        for (std::size_t i = 0; i < records.size(); ++i)
            (split.labels[i] == SplitLabel::low ? low : high).push_back(records[i]);
        result.significant_km.push_back(
            km_compare(row.kind + "_" + row.feature, "below_median", "above_median", low, high));
    }
    return result;
}

ClassificationResult run_classification(const std::vector<PatientFeatures>& features,
                                        const CohortManifest& manifest,
                                        const RunConfig& config) {
    if (features.empty()) throw ArgumentError("run_classification: empty feature table");
    const auto records = align_records(features, manifest);

    // Short/long labels: cohort median of censoring-imputed times; class 1 is
    // the long-term group (imputed time >= threshold).
    const auto imputed = impute_censored(records);
    std::vector<double> times;
    times.reserve(imputed.size());
    for (const auto& r : imputed) times.push_back(r.time_days);
    const MedianSplit label_split = median_split(times);
    if (label_split.degenerate)
        throw ArgumentError("run_classification: all imputed survival times identical");

    ClassificationResult result;
    result.label_threshold_days = label_split.threshold;
    for (std::size_t i = 0; i < features.size(); ++i) {
        result.patient_ids.push_back(features[i].patient_id);
        result.labels.push_back(label_split.labels[i] == SplitLabel::high ? 1 : 0);
    }

    const std::size_t n = features.size();
    Matrix x_srf(n, kFeatureCount), x_drf(n, kFeatureCount);
    for (std::size_t i = 0; i < n; ++i) {
        for (int f = 0; f < kFeatureCount; ++f) {
            x_srf(i, f) = features[i].srf[f];
            x_drf(i, f) = features[i].drf[f];
        }
    }

    ForestParams params;
    params.n_trees = config.n_trees;
    params.seed = Rng::mix(config.seed, 0x464F52ULL);

    result.cv_drf = cross_validate(x_drf, result.labels, params, config.folds);
    result.cv_srf = cross_validate(x_srf, result.labels, params, config.folds);
    result.comparison =
        chisquare_compare(result.cv_drf.oof_labels, result.cv_srf.oof_labels, result.labels);

    // Combined 82-feature forest for the importance report (SRF block first).
    Matrix x_all(n, 2 * kFeatureCount);
    for (std::size_t i = 0; i < n; ++i) {
        for (int f = 0; f < kFeatureCount; ++f) {
            x_all(i, f) = features[i].srf[f];
            x_all(i, kFeatureCount + f) = features[i].drf[f];
        }
    }
    const ForestModel combined = train_forest(x_all, result.labels, params);
    result.importance = oob_importance(combined, x_all, result.labels);
    const auto& names = feature_names();
    for (const std::string kind : {"SRF", "DRF"}) {
        for (int f = 0; f < kFeatureCount; ++f) {
            result.importance_kind.push_back(kind);
            result.importance_name.push_back(names[f]);
        }
    }

    // KM validation of the predicted groups, on the original (time, event).
    auto predicted_km = [&](const CvReport& cv, const std::string& title) {
        std::vector<SurvivalRecord> short_group, long_group;
        for (std::size_t i = 0; i < n; ++i)
            (cv.oof_labels[i] == 1 ? long_group : short_group).push_back(records[i]);
        if (short_group.empty() || long_group.empty()) {
            KmComparison cmp;
            cmp.title = title;
            cmp.group_a_name = "predicted_short";
            cmp.group_b_name = "predicted_long";
            cmp.logrank.p_value = 1.0;
            return cmp;
        }
        return km_compare(title, "predicted_short", "predicted_long", short_group, long_group);
    };
    result.km_predicted_drf = predicted_km(result.cv_drf, "predicted_groups_drf");
    result.km_predicted_srf = predicted_km(result.cv_srf, "predicted_groups_srf");
    return result;
}

// --- report emission --------------------------------------------------------

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    return f;
}

} // namespace

void write_feature_csv(const std::vector<PatientFeatures>& features,
                       const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "patient_id,kind";
    for (const auto& name : feature_names()) f << ',' << name;
    f << '\n';
    for (const auto& row : features) {
        f << row.patient_id << ",SRF";
        for (double v : row.srf) f << ',' << format_double(v);
        f << '\n';
        f << row.patient_id << ",DRF";
        for (double v : row.drf) f << ',' << format_double(v);
        f << '\n';
    }
}

std::vector<PatientFeatures> read_feature_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());

    std::string line;
    if (!std::getline(f, line)) throw FormatError("feature csv is empty");
    {
        std::ostringstream expected;
        expected << "patient_id,kind";
        for (const auto& name : feature_names()) expected << ',' << name;
        if (line != expected.str())
            throw FormatError("feature csv header does not match the 41-feature contract");
    }

    std::map<std::string, std::size_t> index;
    std::vector<PatientFeatures> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id, kind, field;
        std::getline(ss, id, ',');
        std::getline(ss, kind, ',');
        if (kind != "SRF" && kind != "DRF")
            throw FormatError("feature csv: kind must be SRF or DRF, got '" + kind + "'");

        FeatureVector41 values{};
        for (int i = 0; i < kFeatureCount; ++i) {
            if (!std::getline(ss, field, ','))
                throw FormatError("feature csv: row for " + id + " has fewer than 41 values");
            try {
                values[i] = std::stod(field);
            } catch (const std::exception&) {
                throw FormatError("feature csv: non-numeric value '" + field + "' for " + id);
            }
        }
        if (std::getline(ss, field, ','))
            throw FormatError("feature csv: row for " + id + " has more than 41 values");

        auto it = index.find(id);
        if (it == index.end()) {
            index[id] = rows.size();
            rows.push_back({id, {}, {}});
            it = index.find(id);
        }
        (kind == "SRF" ? rows[it->second].srf : rows[it->second].drf) = values;
    }
    return rows;
}

void write_error_ledger(const std::vector<ExtractError>& errors,
                        const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "patient_id,error\n";
    for (const auto& e : errors) {
        std::string msg = e.message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        f << e.patient_id << ',' << msg << '\n';
    }
}

void write_screening_csv(const ScreeningTable& table, const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "kind,feature,raw_p,holm_p,neg_log10_p,significant\n";
    for (const auto& r : table.rows) {
        f << r.kind << ',' << r.feature << ',' << format_double(r.raw_p) << ','
          << format_double(r.holm_p) << ',' << format_double(r.neg_log10_p) << ','
          << (r.significant ? 1 : 0) << '\n';
    }
}

void write_heatmap_csv(const ScreeningTable& table, const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "kind,feature,neg_log10_p\n";
    for (const auto& r : table.rows)
        f << r.kind << ',' << r.feature << ',' << format_double(r.neg_log10_p) << '\n';
}

void write_km_csv(const KmCurve& curve, const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "time,survival,at_risk\n";
    f << "0,1," << (curve.points.empty() ? 0 : curve.points.front().at_risk) << '\n';
    for (const auto& p : curve.points)
        f << format_double(p.time) << ',' << format_double(p.survival) << ',' << p.at_risk << '\n';
}

namespace {

std::string svg_step_path(const KmCurve& curve, double max_time, double x0, double y0,
                          double width, double height) {
    // Step function from S(0) = 1; x scaled by max_time, y by survival.
    auto px = [&](double t) { return x0 + (max_time > 0 ? t / max_time : 0.0) * width; };
    auto py = [&](double s) { return y0 + (1.0 - s) * height; };

    char buf[64];
    std::string d;
    std::snprintf(buf, sizeof(buf), "M %.2f %.2f", px(0.0), py(1.0));
    d += buf;
    double s_prev = 1.0;
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof(buf), " L %.2f %.2f", px(p.time), py(s_prev));
        d += buf;
        std::snprintf(buf, sizeof(buf), " L %.2f %.2f", px(p.time), py(p.survival));
        d += buf;
        s_prev = p.survival;
    }
    std::snprintf(buf, sizeof(buf), " L %.2f %.2f", px(max_time), py(s_prev));
    d += buf;
    return d;
}

} // namespace

void write_km_svg(const KmComparison& cmp, const std::filesystem::path& path) {
    auto f = open_out(path);

    const double width = 640, height = 480;
    const double x0 = 70, y0 = 40, plot_w = width - 110, plot_h = height - 110;

    double max_time = 1.0;
    for (const auto& p : cmp.curve_a.points) max_time = std::max(max_time, p.time);
    for (const auto& p : cmp.curve_b.points) max_time = std::max(max_time, p.time);

    char buf[256];
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
    f << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "  <text x=\"%.0f\" y=\"24\" font-size=\"15\" font-family=\"sans-serif\">%s</text>\n",
                  x0, cmp.title.c_str());
    f << buf;

    // axes
    std::snprintf(buf, sizeof(buf),
                  "  <line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  x0, y0, x0, y0 + plot_h);
    f << buf;
    std::snprintf(buf, sizeof(buf),
                  "  <line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  x0, y0 + plot_h, x0 + plot_w, y0 + plot_h);
    f << buf;
    for (int tick = 0; tick <= 4; ++tick) {
        const double s = 1.0 - 0.25 * tick;
        const double y = y0 + (1.0 - s) * plot_h;
        std::snprintf(buf, sizeof(buf),
                      "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\" "
                      "font-family=\"sans-serif\">%.2f</text>\n",
                      x0 - 6, y + 4, s);
        f << buf;
        const double t = max_time * 0.25 * tick;
        const double x = x0 + 0.25 * tick * plot_w;
        std::snprintf(buf, sizeof(buf),
                      "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\" "
                      "font-family=\"sans-serif\">%.0f</text>\n",
                      x, y0 + plot_h + 16, t);
        f << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\" "
                  "font-family=\"sans-serif\">time (days)</text>\n",
                  x0 + plot_w / 2, height - 14);
    f << buf;
    std::snprintf(buf, sizeof(buf),
                  "  <text x=\"18\" y=\"%.1f\" font-size=\"12\" font-family=\"sans-serif\" "
                  "transform=\"rotate(-90 18 %.1f)\" text-anchor=\"middle\">survival probability</text>\n",
                  y0 + plot_h / 2, y0 + plot_h / 2);
    f << buf;

    f << "  <path d=\"" << svg_step_path(cmp.curve_a, max_time, x0, y0, plot_w, plot_h)
      << "\" fill=\"none\" stroke=\"#1f6fb4\" stroke-width=\"2\"/>\n";
    f << "  <path d=\"" << svg_step_path(cmp.curve_b, max_time, x0, y0, plot_w, plot_h)
      << "\" fill=\"none\" stroke=\"#c23b22\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";

    // legend with the log-rank summary
    std::snprintf(buf, sizeof(buf),
                  "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"#1f6fb4\" "
                  "font-family=\"sans-serif\">%s</text>\n",
                  x0 + plot_w - 180, y0 + 16, cmp.group_a_name.c_str());
    f << buf;
    std::snprintf(buf, sizeof(buf),
                  "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"#c23b22\" "
                  "font-family=\"sans-serif\">%s</text>\n",
                  x0 + plot_w - 180, y0 + 32, cmp.group_b_name.c_str());
    f << buf;
    if (cmp.logrank.hr_defined) {
        std::snprintf(buf, sizeof(buf),
                      "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" font-family=\"sans-serif\">"
                      "p=%.3g HR=%.3g CI=%.3g-%.3g</text>\n",
                      x0 + plot_w - 180, y0 + 48, cmp.logrank.p_value, cmp.logrank.hazard_ratio,
                      cmp.logrank.ci_low, cmp.logrank.ci_high);
        f << buf;
    } else {
        std::snprintf(buf, sizeof(buf),
                      "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" font-family=\"sans-serif\">"
                      "p=%.3g HR undefined</text>\n",
                      x0 + plot_w - 180, y0 + 48, cmp.logrank.p_value);
        f << buf;
    }
    if (cmp.curve_a.median_survival && cmp.curve_b.median_survival) {
        std::snprintf(buf, sizeof(buf),
                      "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" font-family=\"sans-serif\">"
                      "median %.4g vs %.4g days</text>\n",
                      x0 + plot_w - 180, y0 + 64, *cmp.curve_a.median_survival,
                      *cmp.curve_b.median_survival);
        f << buf;
    }
    f << "</svg>\n";
}

void write_auc_summary_csv(const ClassificationResult& result,
                           const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "kind";
    const std::size_t k = result.cv_drf.fold_aucs.size();
    for (std::size_t i = 1; i <= k; ++i) f << ",fold_" << i;
    f << ",mean_auc\n";
    auto write_row = [&](const char* kind, const CvReport& cv) {
        f << kind;
        for (double a : cv.fold_aucs) f << ',' << format_double(a);
        f << ',' << format_double(cv.mean_auc) << '\n';
    };
    write_row("DRF", result.cv_drf);
    write_row("SRF", result.cv_srf);
}

void write_comparison_csv(const ChiSquareComparison& cmp, const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "chi2,p_value,drf_only_correct,srf_only_correct,validity_warning\n";
    f << format_double(cmp.chi2) << ',' << format_double(cmp.p_value) << ','
      << cmp.a_only_correct << ',' << cmp.b_only_correct << ','
      << (cmp.validity_warning ? 1 : 0) << '\n';
}

void write_predicted_logrank_csv(const ClassificationResult& result,
                                 const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "kind,chi2,p_value,hazard_ratio,ci_low,ci_high,hr_defined\n";
    auto row = [&f](const char* kind, const LogRankResult& lr) {
        f << kind << ',' << format_double(lr.chi2) << ',' << format_double(lr.p_value) << ','
          << format_double(lr.hazard_ratio) << ',' << format_double(lr.ci_low) << ','
          << format_double(lr.ci_high) << ',' << (lr.hr_defined ? 1 : 0) << '\n';
    };
    row("DRF", result.km_predicted_drf.logrank);
    row("SRF", result.km_predicted_srf.logrank);
}

void write_predictions_csv(const ClassificationResult& result,
                           const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "patient_id,fold,label,score_drf,pred_drf,score_srf,pred_srf\n";
    for (std::size_t i = 0; i < result.patient_ids.size(); ++i) {
        f << result.patient_ids[i] << ',' << result.cv_drf.folds[i] << ',' << result.labels[i]
          << ',' << format_double(result.cv_drf.oof_scores[i]) << ','
          << result.cv_drf.oof_labels[i] << ',' << format_double(result.cv_srf.oof_scores[i])
          << ',' << result.cv_srf.oof_labels[i] << '\n';
    }
}

void write_importance_csv(const ClassificationResult& result,
                          const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "rank,kind,feature,importance,predictive\n";

    std::vector<std::size_t> order(result.importance.importance.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return result.importance.importance[a] > result.importance.importance[b];
    });

    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const std::size_t i = order[rank];
        f << (rank + 1) << ',' << result.importance_kind[i] << ',' << result.importance_name[i]
          << ',' << format_double(result.importance.importance[i]) << ','
          << (result.importance.predictive[i] ? 1 : 0) << '\n';
    }
}

void write_run_manifest(const RunConfig& config, const std::filesystem::path& path) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["seed"] = config.seed;
    j["config"]["manifest"] = config.manifest_path.string();
    j["config"]["weights"] =
        config.weights_path.empty() ? std::string("seeded-fallback") : config.weights_path.string();
    j["config"]["input_dims"] = {config.input_dims[0], config.input_dims[1], config.input_dims[2]};
    j["config"]["gray_levels"] = config.gray_levels;
    j["config"]["matrix_levels"] = config.matrix_levels;
    j["config"]["trees"] = config.n_trees;
    j["config"]["folds"] = config.folds;
    j["config"]["jobs"] = config.jobs;
    j["config"]["out"] = config.out_dir.string();

    auto f = open_out(path);
    f << j.dump(2) << '\n';
}

RunAllResult run_all(const RunConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + config.out_dir.string());

    RunAllResult result;
    result.extraction = extract_cohort_features(config);
    write_feature_csv(result.extraction.features, config.out_dir / "features.csv");
    write_error_ledger(result.extraction.errors, config.out_dir / "errors.csv");

    const CohortManifest manifest = read_manifest(config.manifest_path);

    result.univariate = run_univariate(result.extraction.features, manifest);
    write_screening_csv(result.univariate.table, config.out_dir / "screening.csv");
    write_heatmap_csv(result.univariate.table, config.out_dir / "heatmap.csv");
    for (const auto& cmp : result.univariate.significant_km) {
        write_km_csv(cmp.curve_a, config.out_dir / ("km_" + cmp.title + "_low.csv"));
        write_km_csv(cmp.curve_b, config.out_dir / ("km_" + cmp.title + "_high.csv"));
        write_km_svg(cmp, config.out_dir / ("km_" + cmp.title + ".svg"));
    }

    result.classification = run_classification(result.extraction.features, manifest, config);
    write_auc_summary_csv(result.classification, config.out_dir / "auc_summary.csv");
    write_comparison_csv(result.classification.comparison, config.out_dir / "auc_comparison.csv");
    write_predicted_logrank_csv(result.classification, config.out_dir / "logrank_predicted.csv");
    write_predictions_csv(result.classification, config.out_dir / "predictions.csv");
    write_importance_csv(result.classification, config.out_dir / "importance.csv");
    for (const auto* cmp :
         {&result.classification.km_predicted_drf, &result.classification.km_predicted_srf}) {
        if (cmp->curve_a.points.empty() && cmp->curve_b.points.empty()) continue;
        write_km_csv(cmp->curve_a, config.out_dir / ("km_" + cmp->title + "_short.csv"));
        write_km_csv(cmp->curve_b, config.out_dir / ("km_" + cmp->title + "_long.csv"));
        write_km_svg(*cmp, config.out_dir / ("km_" + cmp->title + ".svg"));
    }

    write_run_manifest(config, config.out_dir / "run_manifest.json");
    result.exit_code = result.extraction.errors.empty() ? 0 : 2;
    return result;
}

} // namespace drf
