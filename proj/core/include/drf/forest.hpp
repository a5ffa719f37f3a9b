#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace drf {

/// Row-major patients x features table.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct ForestParams {
    int n_trees = 500;
    int mtry = 0; // 0 = ceil(sqrt(p))
    int min_leaf = 1;
    int max_depth = 0; // 0 = unlimited
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<double, 2> class_prob{0.0, 0.0};
};

struct Tree {
    std::vector<TreeNode> nodes; // node 0 is the root

    const TreeNode& leaf_for(const double* row) const {
        int idx = 0;
        while (nodes[idx].feature >= 0) {
            idx = (row[nodes[idx].feature] < nodes[idx].threshold) ? nodes[idx].left
                                                                   : nodes[idx].right;
        }
        return nodes[idx];
    }
};

struct ForestModel {
    std::vector<Tree> trees;
    std::vector<std::vector<int>> oob_sets; // per tree, sorted sample indices
    ForestParams params;
    std::size_t n_features = 0;
};

/// CART forest on bootstrap samples: Gini splits over mtry features sampled
/// per node, midpoint thresholds, deterministic tie-breaking (lowest feature
/// index, then lowest threshold). Throws TrainError when y has one class.
ForestModel train_forest(const Matrix& X, const std::vector<int>& y, const ForestParams& params);

/// Mean of the trees' leaf class-1 probabilities per row.
std::vector<double> predict_proba(const ForestModel& model, const Matrix& X);

/// Mann-Whitney AUC: P(score+ > score-) + 0.5 P(tie). Both classes required.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Per class: seeded shuffle then round-robin fold assignment. Every class
/// must have at least k members.
std::vector<int> stratified_kfold(const std::vector<int>& y, int k, std::uint64_t seed);

struct CvReport {
    std::vector<double> fold_aucs;
    double mean_auc = 0.0;
    std::vector<double> oof_scores; // one out-of-fold score per patient
    std::vector<int> oof_labels;    // score >= 0.5
    std::vector<int> folds;
};

CvReport cross_validate(const Matrix& X, const std::vector<int>& y, const ForestParams& params,
                        int k = 5);

struct ChiSquareComparison {
    double chi2 = 0.0;
    double p_value = 1.0;
    std::size_t a_only_correct = 0; // discordant cells of the paired table
    std::size_t b_only_correct = 0;
    bool validity_warning = false; // some expected cell < 5
};

/// Chi-square test (1 df) on the paired 2x2 correctness table of two
/// prediction vectors; the statistic is computed from the discordant cells,
/// so identical vectors give p = 1.
ChiSquareComparison chisquare_compare(const std::vector<int>& preds_a,
                                      const std::vector<int>& preds_b,
                                      const std::vector<int>& labels);

struct ImportanceReport {
    std::vector<double> importance; // per feature, normalized
    std::vector<bool> predictive;   // importance > 0
};

/// Out-of-bag permutation importance: per-tree accuracy drop after permuting
/// one feature's OOB column, averaged over trees and divided by the standard
/// deviation over trees (0/0 -> 0). Features untouched by every tree score
/// exactly 0.
ImportanceReport oob_importance(const ForestModel& model, const Matrix& X,
                                const std::vector<int>& y);

/// Deterministic text dump of a trained forest; load(save(m)) round-trips.
void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

} // namespace drf
