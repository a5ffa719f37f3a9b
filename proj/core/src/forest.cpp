#include "drf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "drf/error.hpp"
#include "drf/rng.hpp"
#include "drf/survival.hpp" // chi2_pvalue_1df

namespace drf {

namespace {

int effective_mtry(const ForestParams& params, std::size_t p) {
    if (params.mtry > 0) return std::min<int>(params.mtry, static_cast<int>(p));
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
}

double gini(std::size_t n1, std::size_t n) {
    if (n == 0) return 0.0;
    const double p1 = static_cast<double>(n1) / static_cast<double>(n);
    return 2.0 * p1 * (1.0 - p1);
}

struct TreeBuilder {
    const Matrix& X;
    const std::vector<int>& y;
    int mtry;
    int min_leaf;
    int max_depth;
    Rng& rng;
    Tree tree;
    std::vector<int> feature_pool; // scratch for per-node mtry sampling

    // Sorted (value, sample index) pairs reused across nodes.
    std::vector<std::pair<double, int>> scratch;

    int build(std::vector<int>& samples, int depth) {
        const std::size_t n = samples.size();
        std::size_t n1 = 0;
        for (int s : samples) n1 += (y[s] == 1);

        const bool pure = (n1 == 0 || n1 == n);
        const bool depth_capped = (max_depth > 0 && depth >= max_depth);
        if (pure || depth_capped || n < static_cast<std::size_t>(2 * min_leaf)) {
            return make_leaf(n1, n);
        }

        // mtry distinct candidate features, then evaluated in ascending index
        // order so equal-gain ties resolve to the lowest feature index.
        const std::size_t p = X.cols;
        feature_pool.resize(p);
        std::iota(feature_pool.begin(), feature_pool.end(), 0);
        for (int i = 0; i < mtry; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.index(p - i));
            std::swap(feature_pool[i], feature_pool[j]);
        }
        std::sort(feature_pool.begin(), feature_pool.begin() + mtry);

        const double parent_impurity = gini(n1, n);
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;

        for (int fi = 0; fi < mtry; ++fi) {
            const int f = feature_pool[fi];
            scratch.clear();
            for (int s : samples) scratch.emplace_back(X(s, f), s);
            std::sort(scratch.begin(), scratch.end());

            std::size_t left_n = 0, left_n1 = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                ++left_n;
                left_n1 += (y[scratch[i].second] == 1);
                if (scratch[i].first == scratch[i + 1].first) continue;
                const std::size_t right_n = n - left_n;
                if (left_n < static_cast<std::size_t>(min_leaf) ||
                    right_n < static_cast<std::size_t>(min_leaf))
                    continue;
                const double child =
                    (static_cast<double>(left_n) * gini(left_n1, left_n) +
                     static_cast<double>(right_n) * gini(n1 - left_n1, right_n)) /
                    static_cast<double>(n);
                const double gain = parent_impurity - child;
                // Strict improvement over best_gain = 0 demands a useful split;
                // candidates are swept in ascending (feature, threshold) order,
                // so ties keep the lowest feature index and lowest threshold.
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
                }
            }
        }

        if (best_feature < 0) return make_leaf(n1, n);

        std::vector<int> left, right;
        left.reserve(n);
        right.reserve(n);
        for (int s : samples)
            (X(s, best_feature) < best_threshold ? left : right).push_back(s);

        const int node_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({best_feature, best_threshold, -1, -1, {0.0, 0.0}});
        const int left_idx = build(left, depth + 1);
        const int right_idx = build(right, depth + 1);
        tree.nodes[node_idx].left = left_idx;
        tree.nodes[node_idx].right = right_idx;
        return node_idx;
    }

    int make_leaf(std::size_t n1, std::size_t n) {
        const double p1 = n > 0 ? static_cast<double>(n1) / static_cast<double>(n) : 0.0;
        tree.nodes.push_back({-1, 0.0, -1, -1, {1.0 - p1, p1}});
        return static_cast<int>(tree.nodes.size() - 1);
    }
};

} // namespace

ForestModel train_forest(const Matrix& X, const std::vector<int>& y, const ForestParams& params) {
    if (X.rows != y.size()) throw ShapeError("train_forest: X rows and y length differ");
    if (X.rows == 0 || X.cols == 0) throw ArgumentError("train_forest: empty matrix");
    if (params.n_trees < 1) throw ArgumentError("train_forest: n_trees must be >= 1");
    std::size_t n1 = 0;
    for (int label : y) {
        if (label != 0 && label != 1) throw ArgumentError("train_forest: labels must be 0/1");
        n1 += (label == 1);
    }
    if (n1 == 0 || n1 == y.size()) throw TrainError("train_forest: y holds a single class");

    ForestModel model;
    model.params = params;
    model.n_features = X.cols;
    model.trees.reserve(params.n_trees);
    model.oob_sets.reserve(params.n_trees);

    const std::size_t n = X.rows;
    const int mtry = effective_mtry(params, X.cols);

    for (int t = 0; t < params.n_trees; ++t) {
        Rng rng(Rng::mix(params.seed, static_cast<std::uint64_t>(t)));

        std::vector<int> samples(n);
        std::vector<std::uint8_t> in_bag(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const int s = static_cast<int>(rng.index(n));
            samples[i] = s;
            in_bag[s] = 1;
        }

        // Bootstrap may sample a single class; the tree then degenerates to
        // one leaf, which is fine for ensemble averaging.
        TreeBuilder builder{X, y, mtry, params.min_leaf, params.max_depth, rng};
        builder.build(samples, 0);
        model.trees.push_back(std::move(builder.tree));

        std::vector<int> oob;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_bag[i]) oob.push_back(static_cast<int>(i));
        model.oob_sets.push_back(std::move(oob));
    }
    return model;
}

std::vector<double> predict_proba(const ForestModel& model, const Matrix& X) {
    if (X.cols != model.n_features)
        throw ShapeError("predict_proba: feature arity " + std::to_string(X.cols) +
                         " differs from training arity " + std::to_string(model.n_features));
    std::vector<double> scores(X.rows, 0.0);
    for (std::size_t r = 0; r < X.rows; ++r) {
        const double* row = X.data.data() + r * X.cols;
        double acc = 0.0;
        for (const Tree& tree : model.trees) acc += tree.leaf_for(row).class_prob[1];
        scores[r] = acc / static_cast<double>(model.trees.size());
    }
    return scores;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ArgumentError("roc_auc: length mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int label : labels) n_pos += (label == 1);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw ArgumentError("roc_auc: both classes must be present");

    // Mann-Whitney via midranks (ties get the average rank).
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j + 1); // ranks are 1-based
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += midrank;
        i = j;
    }
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<int> stratified_kfold(const std::vector<int>& y, int k, std::uint64_t seed) {
    if (k < 2) throw ArgumentError("stratified_kfold: k must be >= 2");
    std::vector<int> folds(y.size(), -1);
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == cls) members.push_back(i);
        if (members.size() < static_cast<std::size_t>(k))
            throw ArgumentError("stratified_kfold: class " + std::to_string(cls) +
                                " has fewer than k members");
        Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(cls)));
        rng.shuffle(members);
        for (std::size_t j = 0; j < members.size(); ++j)
            folds[members[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
    }
    return folds;
}

CvReport cross_validate(const Matrix& X, const std::vector<int>& y, const ForestParams& params,
                        int k) {
    if (X.rows != y.size()) throw ShapeError("cross_validate: X rows and y length differ");

    CvReport report;
    report.folds = stratified_kfold(y, k, params.seed);
    report.oof_scores.assign(X.rows, 0.0);
    report.oof_labels.assign(X.rows, 0);

    for (int fold = 0; fold < k; ++fold) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < X.rows; ++i)
            (report.folds[i] == fold ? test_idx : train_idx).push_back(i);

        Matrix x_train(train_idx.size(), X.cols);
        std::vector<int> y_train(train_idx.size());
        for (std::size_t r = 0; r < train_idx.size(); ++r) {
            for (std::size_t c = 0; c < X.cols; ++c) x_train(r, c) = X(train_idx[r], c);
            y_train[r] = y[train_idx[r]];
        }
        Matrix x_test(test_idx.size(), X.cols);
        std::vector<int> y_test(test_idx.size());
        for (std::size_t r = 0; r < test_idx.size(); ++r) {
            for (std::size_t c = 0; c < X.cols; ++c) x_test(r, c) = X(test_idx[r], c);
            y_test[r] = y[test_idx[r]];
        }

        ForestParams fold_params = params;
        fold_params.seed = Rng::mix(params.seed, 0x464F4C44ULL, static_cast<std::uint64_t>(fold));
        const ForestModel model = train_forest(x_train, y_train, fold_params);
        const auto scores = predict_proba(model, x_test);

        report.fold_aucs.push_back(roc_auc(scores, y_test));
        for (std::size_t r = 0; r < test_idx.size(); ++r) {
            report.oof_scores[test_idx[r]] = scores[r];
            report.oof_labels[test_idx[r]] = scores[r] >= 0.5 ? 1 : 0;
        }
    }
    report.mean_auc = std::accumulate(report.fold_aucs.begin(), report.fold_aucs.end(), 0.0) /
                      static_cast<double>(report.fold_aucs.size());
    return report;
}

ChiSquareComparison chisquare_compare(const std::vector<int>& preds_a,
                                      const std::vector<int>& preds_b,
                                      const std::vector<int>& labels) {
    if (preds_a.size() != preds_b.size() || preds_a.size() != labels.size())
        throw ArgumentError("chisquare_compare: length mismatch");
    if (preds_a.empty()) throw ArgumentError("chisquare_compare: empty input");

    // Paired correctness table: cell[a_correct][b_correct].
    std::array<std::array<std::size_t, 2>, 2> cell{{{0, 0}, {0, 0}}};
    for (std::size_t i = 0; i < preds_a.size(); ++i) {
        const int a_ok = (preds_a[i] == labels[i]) ? 1 : 0;
        const int b_ok = (preds_b[i] == labels[i]) ? 1 : 0;
        ++cell[a_ok][b_ok];
    }

    ChiSquareComparison out;
    out.a_only_correct = cell[1][0];
    out.b_only_correct = cell[0][1];

    const double n = static_cast<double>(preds_a.size());
    const double row0 = static_cast<double>(cell[0][0] + cell[0][1]);
    const double row1 = static_cast<double>(cell[1][0] + cell[1][1]);
    const double col0 = static_cast<double>(cell[0][0] + cell[1][0]);
    const double col1 = static_cast<double>(cell[0][1] + cell[1][1]);
    for (double margin : {row0, row1, col0, col1})
        if (margin == 0.0) out.validity_warning = true;
    for (double e : {row0 * col0 / n, row0 * col1 / n, row1 * col0 / n, row1 * col1 / n})
        if (e < 5.0) out.validity_warning = true;

    const double discordant =
        static_cast<double>(out.a_only_correct + out.b_only_correct);
    if (discordant == 0.0) {
        out.chi2 = 0.0;
        out.p_value = 1.0;
        out.validity_warning = true;
        return out;
    }
    const double diff = static_cast<double>(out.a_only_correct) -
                        static_cast<double>(out.b_only_correct);
    out.chi2 = diff * diff / discordant;
    out.p_value = chi2_pvalue_1df(out.chi2);
    return out;
}

namespace {

std::vector<std::uint8_t> features_used(const Tree& tree, std::size_t p) {
    std::vector<std::uint8_t> used(p, 0);
    for (const auto& node : tree.nodes)
        if (node.feature >= 0) used[node.feature] = 1;
    return used;
}

// Tree prediction with one feature's value overridden.
int predict_override(const Tree& tree, const double* row, int f, double value) {
    int idx = 0;
    while (tree.nodes[idx].feature >= 0) {
        const auto& nd = tree.nodes[idx];
        const double v = (nd.feature == f) ? value : row[nd.feature];
        idx = (v < nd.threshold) ? nd.left : nd.right;
    }
    return tree.nodes[idx].class_prob[1] >= 0.5 ? 1 : 0;
}

} // namespace

ImportanceReport oob_importance(const ForestModel& model, const Matrix& X,
                                const std::vector<int>& y) {
    if (X.cols != model.n_features) throw ShapeError("oob_importance: feature arity mismatch");
    if (X.rows != y.size()) throw ShapeError("oob_importance: X rows and y length differ");

    const std::size_t p = X.cols;
    // Per feature: accuracy drops of the trees that both have OOB samples and
    // actually split on the feature; unused features drop exactly 0.
    std::vector<std::vector<double>> drops(p);
    std::size_t used_trees = 0;

    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& oob = model.oob_sets[t];
        if (oob.empty()) continue;
        ++used_trees;
        const Tree& tree = model.trees[t];
        const auto used = features_used(tree, p);

        std::size_t correct = 0;
        for (int s : oob) {
            const double* xrow = X.data.data() + static_cast<std::size_t>(s) * p;
            const int pred = tree.leaf_for(xrow).class_prob[1] >= 0.5 ? 1 : 0;
            correct += (pred == y[s]);
        }
        const double base_acc = static_cast<double>(correct) / static_cast<double>(oob.size());

        for (std::size_t f = 0; f < p; ++f) {
            if (!used[f]) {
                // The tree never reads this feature: the permuted prediction
                // is identical and the drop is exactly zero.
                drops[f].push_back(0.0);
                continue;
            }
            // Seeded permutation of this feature's OOB column.
            std::vector<int> perm(oob);
            Rng rng(Rng::mix(model.params.seed, 0x494D50ULL + t, f));
            rng.shuffle(perm);

            std::size_t perm_correct = 0;
            for (std::size_t i = 0; i < oob.size(); ++i) {
                const int s = oob[i];
                const double* xrow = X.data.data() + static_cast<std::size_t>(s) * p;
                const int pred =
                    predict_override(tree, xrow, static_cast<int>(f), X(perm[i], f));
                perm_correct += (pred == y[s]);
            }
            drops[f].push_back(base_acc - static_cast<double>(perm_correct) /
                                              static_cast<double>(oob.size()));
        }
    }

    ImportanceReport report;
    report.importance.assign(p, 0.0);
    report.predictive.assign(p, false);
    if (used_trees == 0) return report;

    for (std::size_t f = 0; f < p; ++f) {
        const auto& d = drops[f];
        const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
        double var = 0.0;
        for (double v : d) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / static_cast<double>(d.size()));
        report.importance[f] = (sd > 0.0) ? mean / sd : 0.0;
        report.predictive[f] = report.importance[f] > 0.0;
    }
    return report;
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << "drf_forest 1\n";
    f << "n_trees " << model.trees.size() << " n_features " << model.n_features << " seed "
      << model.params.seed << " mtry " << model.params.mtry << " min_leaf "
      << model.params.min_leaf << " max_depth " << model.params.max_depth << '\n';
    char buf[64];
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const Tree& tree = model.trees[t];
        f << "tree " << t << " nodes " << tree.nodes.size() << " oob " << model.oob_sets[t].size();
        for (int s : model.oob_sets[t]) f << ' ' << s;
        f << '\n';
        for (const auto& nd : tree.nodes) {
            std::snprintf(buf, sizeof(buf), "%.17g", nd.threshold);
            f << nd.feature << ' ' << buf << ' ' << nd.left << ' ' << nd.right;
            std::snprintf(buf, sizeof(buf), " %.17g", nd.class_prob[0]);
            f << buf;
            std::snprintf(buf, sizeof(buf), " %.17g", nd.class_prob[1]);
            f << buf << '\n';
        }
    }
    if (!f) throw IoError("short write to " + path.string());
}

ForestModel load_model(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());

    std::string word;
    int version;
    if (!(f >> word >> version) || word != "drf_forest" || version != 1)
        throw FormatError("model file header: expected 'drf_forest 1'");

    ForestModel model;
    std::size_t n_trees;
    std::string k1, k2, k3, k4, k5, k6;
    if (!(f >> k1 >> n_trees >> k2 >> model.n_features >> k3 >> model.params.seed >> k4 >>
          model.params.mtry >> k5 >> model.params.min_leaf >> k6 >> model.params.max_depth))
        throw FormatError("model file header: bad parameter line");
    model.params.n_trees = static_cast<int>(n_trees);

    for (std::size_t t = 0; t < n_trees; ++t) {
        std::size_t idx, n_nodes, n_oob;
        if (!(f >> word >> idx >> k1 >> n_nodes >> k2 >> n_oob) || word != "tree")
            throw FormatError("model file: bad tree header at tree " + std::to_string(t));
        std::vector<int> oob(n_oob);
        for (auto& s : oob)
            if (!(f >> s)) throw FormatError("model file: truncated oob set");
        Tree tree;
        tree.nodes.resize(n_nodes);
        for (auto& nd : tree.nodes) {
            if (!(f >> nd.feature >> nd.threshold >> nd.left >> nd.right >> nd.class_prob[0] >>
                  nd.class_prob[1]))
                throw FormatError("model file: truncated node record");
        }
        model.trees.push_back(std::move(tree));
        model.oob_sets.push_back(std::move(oob));
    }
    return model;
}

} // namespace drf
