#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace courtaudit {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // node 0 is the root

    double value_for(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

struct GbdtConfig {
    int n_estimators = 100;
    int max_depth = 4;
    double learning_rate = 0.1;
    int min_leaf = 20;      // smallest row count allowed in a leaf
    int max_bins = 32;      // quantile split candidates per feature
    double lambda = 0.0;    // leaf-value denominator regularizer
    bool exact_splits = false;  // consider every midpoint instead of quantiles
};

// Gradient-boosted trees on the logistic loss: each stage fits a depth-limited
// regression tree to the loss gradients with second-order (Newton) leaf
// values. A prediction is sigmoid(base_score + learning_rate * sum of leaf
// values), so earlier trees are exactly the prefix of a longer fit.
struct GbdtModel {
    GbdtConfig config;
    double base_score = 0.0;  // log-odds of training prevalence
    std::vector<std::string> feature_names;
    std::vector<Tree> trees;
    std::vector<double> training_loss;  // mean logistic loss after 0..n stages

    Eigen::VectorXd decision_function(const Eigen::MatrixXd& X) const;
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;

    std::string to_json() const;
    static GbdtModel from_json(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static GbdtModel load(const std::filesystem::path& path);
};

GbdtModel fit_gbdt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const GbdtConfig& config,
                   std::vector<std::string> feature_names = {});

struct GbdtCvConfig {
    int folds = 3;
    std::vector<int> n_estimators_grid{25, 50, 100};
    std::vector<int> max_depth_grid{2, 4, 5};
    std::vector<double> learning_rate_grid{0.01, 0.1, 0.2};
    std::uint64_t seed = 0;
    int min_leaf = 20;
    int max_bins = 32;
    double lambda = 0.0;
    bool exact_splits = false;
};

struct GbdtCvCell {
    int n_estimators = 0;
    int max_depth = 0;
    double learning_rate = 0.0;
    double mean_accuracy = 0.0;
};

struct GbdtCvResult {
    GbdtConfig best_config;
    double best_accuracy = 0.0;
    std::vector<GbdtCvCell> table;  // one row per grid point
    GbdtModel model;                // refit on all rows with best_config
};

// Seeded k-fold grid search maximizing mean validation accuracy; ties break
// toward fewer trees, then shallower depth, then lower learning rate. Fits
// with fewer estimators reuse the prefix of the longest fit per (depth, rate).
GbdtCvResult fit_gbdt_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const GbdtCvConfig& cv,
                         std::vector<std::string> feature_names = {});

}  // namespace courtaudit
