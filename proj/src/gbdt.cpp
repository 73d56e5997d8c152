#include "courtaudit/gbdt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "courtaudit/rng.hpp"
#include "courtaudit/text_io.hpp"

namespace courtaudit {

namespace {

constexpr double kMinGain = 1e-12;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double mean_logistic_loss(const Eigen::VectorXd& f, const Eigen::VectorXd& y) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double softplus = std::max(f(i), 0.0) + std::log1p(std::exp(-std::abs(f(i))));
        total += softplus - y(i) * f(i);
    }
    return total / static_cast<double>(f.size());
}

// Split thresholds per feature: all midpoints between adjacent distinct values
// when exact (or few values), otherwise up to max_bins - 1 quantile cuts.
std::vector<std::vector<double>> split_candidates(const Eigen::MatrixXd& X,
                                                  int max_bins, bool exact) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        std::vector<double> values(X.col(j).data(), X.col(j).data() + X.rows());
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        auto& cand = out[static_cast<std::size_t>(j)];
        if (values.size() < 2) continue;
        if (exact || static_cast<int>(values.size()) <= max_bins) {
            for (std::size_t i = 0; i + 1 < values.size(); ++i)
                cand.push_back(0.5 * (values[i] + values[i + 1]));
        } else {
            for (int b = 1; b < max_bins; ++b) {
                const std::size_t idx =
                    static_cast<std::size_t>(b) * (values.size() - 1) /
                    static_cast<std::size_t>(max_bins);
                const double t = 0.5 * (values[idx] + values[idx + 1]);
                if (cand.empty() || t > cand.back()) cand.push_back(t);
            }
        }
    }
    return out;
}

struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& grad;
    const Eigen::VectorXd& hess;
    const std::vector<std::vector<double>>& candidates;
    const GbdtConfig& config;
    Tree tree;

    double leaf_value(double g, double h) const { return -g / (h + config.lambda); }

    int build(std::vector<int>& rows, int depth) {
        double g_total = 0.0, h_total = 0.0;
        for (const int r : rows) {
            g_total += grad(r);
            h_total += hess(r);
        }

        int best_feature = -1;
        double best_threshold = 0.0, best_gain = kMinGain;
        if (depth < config.max_depth &&
            static_cast<int>(rows.size()) >= 2 * config.min_leaf) {
            const double parent_score = g_total * g_total / (h_total + config.lambda);
            for (Eigen::Index j = 0; j < X.cols(); ++j) {
                const auto& cand = candidates[static_cast<std::size_t>(j)];
                if (cand.empty()) continue;
                // histogram per candidate segment; segment s collects rows with
                // cand[s-1] < x <= cand[s]
                const std::size_t n_seg = cand.size() + 1;
                std::vector<double> g_seg(n_seg, 0.0), h_seg(n_seg, 0.0);
                std::vector<int> n_seg_count(n_seg, 0);
                for (const int r : rows) {
                    const double v = X(r, j);
                    const std::size_t s = static_cast<std::size_t>(
                        std::lower_bound(cand.begin(), cand.end(), v) - cand.begin());
                    g_seg[s] += grad(r);
                    h_seg[s] += hess(r);
                    ++n_seg_count[s];
                }
                double g_left = 0.0, h_left = 0.0;
                int n_left = 0;
                for (std::size_t s = 0; s + 1 < n_seg; ++s) {
                    g_left += g_seg[s];
                    h_left += h_seg[s];
                    n_left += n_seg_count[s];
                    const int n_right = static_cast<int>(rows.size()) - n_left;
                    if (n_left < config.min_leaf || n_right < config.min_leaf) continue;
                    const double g_right = g_total - g_left;
                    const double h_right = h_total - h_left;
                    const double gain =
                        0.5 * (g_left * g_left / (h_left + config.lambda) +
                               g_right * g_right / (h_right + config.lambda) -
                               parent_score);
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = static_cast<int>(j);
                        best_threshold = cand[s];
                    }
                }
            }
        }

        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (best_feature < 0) {
            tree.nodes[static_cast<std::size_t>(index)].value =
                leaf_value(g_total, h_total);
            return index;
        }

        std::vector<int> left_rows, right_rows;
        for (const int r : rows)
            (X(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        tree.nodes[static_cast<std::size_t>(index)].feature = best_feature;
        tree.nodes[static_cast<std::size_t>(index)].threshold = best_threshold;
        const int left = build(left_rows, depth + 1);
        tree.nodes[static_cast<std::size_t>(index)].left = left;
        const int right = build(right_rows, depth + 1);
        tree.nodes[static_cast<std::size_t>(index)].right = right;
        return index;
    }
};

void validate_labels(const Eigen::VectorXd& y) {
    bool has_zero = false, has_one = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) == 0.0)
            has_zero = true;
        else if (y(i) == 1.0)
            has_one = true;
        else
            throw std::invalid_argument("labels must be 0 or 1");
    }
    if (!has_zero || !has_one)
        throw std::invalid_argument("labels must include both classes");
}

}  // namespace

double Tree::value_for(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(node)];
        node = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

Eigen::VectorXd GbdtModel::decision_function(const Eigen::MatrixXd& X) const {
    if (X.cols() != static_cast<Eigen::Index>(feature_names.size()))
        throw std::invalid_argument("feature count does not match the fitted schema");
    Eigen::VectorXd f = Eigen::VectorXd::Constant(X.rows(), base_score);
    for (const auto& tree : trees)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            f(i) += config.learning_rate * tree.value_for(X.row(i));
    return f;
}

Eigen::VectorXd GbdtModel::predict_proba(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd f = decision_function(X);
    Eigen::VectorXd p(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i)
        p(i) = std::clamp(sigmoid(f(i)), 1e-15, 1.0 - 1e-15);
    return p;
}

GbdtModel fit_gbdt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const GbdtConfig& config, std::vector<std::string> feature_names) {
    if (X.rows() == 0) throw std::invalid_argument("no rows to fit");
    if (y.size() != X.rows()) throw std::invalid_argument("label count does not match rows");
    validate_labels(y);
    if (config.n_estimators < 1) throw std::invalid_argument("need at least one stage");
    if (config.max_depth < 1) throw std::invalid_argument("max depth must be positive");
    if (config.min_leaf < 1) throw std::invalid_argument("min leaf must be positive");
    if (config.max_bins < 2) throw std::invalid_argument("need at least two bins");
    if (!(config.learning_rate > 0.0))
        throw std::invalid_argument("learning rate must be positive");
    if (!feature_names.empty() &&
        feature_names.size() != static_cast<std::size_t>(X.cols()))
        throw std::invalid_argument("feature name count does not match columns");
    if (feature_names.empty())
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            feature_names.push_back("x" + std::to_string(j));

    GbdtModel model;
    model.config = config;
    model.feature_names = std::move(feature_names);
    const double prevalence = y.mean();
    model.base_score = std::log(prevalence / (1.0 - prevalence));

    const auto candidates = split_candidates(X, config.max_bins, config.exact_splits);
    Eigen::VectorXd f = Eigen::VectorXd::Constant(X.rows(), model.base_score);
    model.training_loss.push_back(mean_logistic_loss(f, y));

    Eigen::VectorXd grad(X.rows()), hess(X.rows());
    for (int m = 0; m < config.n_estimators; ++m) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double p = sigmoid(f(i));
            grad(i) = p - y(i);
            hess(i) = p * (1.0 - p);
        }
        TreeBuilder builder{X, grad, hess, candidates, config, Tree{}};
        std::vector<int> all_rows(static_cast<std::size_t>(X.rows()));
        std::iota(all_rows.begin(), all_rows.end(), 0);
        builder.build(all_rows, 0);
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            f(i) += config.learning_rate * builder.tree.value_for(X.row(i));
        model.trees.push_back(std::move(builder.tree));
        model.training_loss.push_back(mean_logistic_loss(f, y));
    }
    return model;
}

std::string GbdtModel::to_json() const {
    nlohmann::json j;
    j["config"] = {{"n_estimators", config.n_estimators},
                   {"max_depth", config.max_depth},
                   {"learning_rate", config.learning_rate},
                   {"min_leaf", config.min_leaf},
                   {"max_bins", config.max_bins},
                   {"lambda", config.lambda},
                   {"exact_splits", config.exact_splits}};
    j["base_score"] = base_score;
    j["feature_names"] = feature_names;
    j["training_loss"] = training_loss;
    nlohmann::json trees_json = nlohmann::json::array();
    for (const auto& tree : trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree.nodes)
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"value", n.value}});
        trees_json.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees_json);
    return j.dump(2) + "\n";
}

GbdtModel GbdtModel::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    GbdtModel model;
    const auto& c = j.at("config");
    model.config.n_estimators = c.at("n_estimators").get<int>();
    model.config.max_depth = c.at("max_depth").get<int>();
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.min_leaf = c.at("min_leaf").get<int>();
    model.config.max_bins = c.at("max_bins").get<int>();
    model.config.lambda = c.at("lambda").get<double>();
    model.config.exact_splits = c.at("exact_splits").get<bool>();
    model.base_score = j.at("base_score").get<double>();
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.training_loss = j.at("training_loss").get<std::vector<double>>();
    for (const auto& nodes : j.at("trees")) {
        Tree tree;
        for (const auto& n : nodes) {
            TreeNode node;
            node.feature = n.at("feature").get<int>();
            node.threshold = n.at("threshold").get<double>();
            node.left = n.at("left").get<int>();
            node.right = n.at("right").get<int>();
            node.value = n.at("value").get<double>();
            tree.nodes.push_back(node);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

void GbdtModel::save(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json());
}

GbdtModel GbdtModel::load(const std::filesystem::path& path) {
    return from_json(read_file(path));
}

GbdtCvResult fit_gbdt_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const GbdtCvConfig& cv,
                         std::vector<std::string> feature_names) {
    if (cv.folds < 2) throw std::invalid_argument("need at least two folds");
    if (X.rows() < static_cast<Eigen::Index>(cv.folds) * 2)
        throw std::invalid_argument("too few rows for the requested folds");
    if (cv.n_estimators_grid.empty() || cv.max_depth_grid.empty() ||
        cv.learning_rate_grid.empty())
        throw std::invalid_argument("hyperparameter grid must be non-empty");
    validate_labels(y);

    std::vector<int> stages = cv.n_estimators_grid;
    std::sort(stages.begin(), stages.end());
    stages.erase(std::unique(stages.begin(), stages.end()), stages.end());
    if (stages.front() < 1) throw std::invalid_argument("need at least one stage");
    std::vector<int> depths = cv.max_depth_grid;
    std::sort(depths.begin(), depths.end());
    depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
    std::vector<double> rates = cv.learning_rate_grid;
    std::sort(rates.begin(), rates.end());
    rates.erase(std::unique(rates.begin(), rates.end()), rates.end());

    // seeded fold assignment: shuffled row order dealt round-robin
    Rng rng(cv.seed);
    std::vector<int> order(static_cast<std::size_t>(X.rows()));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(cv.folds));
    for (std::size_t i = 0; i < order.size(); ++i)
        folds[i % static_cast<std::size_t>(cv.folds)].push_back(order[i]);
    for (auto& fold : folds) {
        std::sort(fold.begin(), fold.end());
        bool has_zero = false, has_one = false;
        for (const int r : fold) (y(r) == 1.0 ? has_one : has_zero) = true;
        if (!has_zero || !has_one)
            throw std::invalid_argument("degenerate folds: a fold is missing a class");
    }

    // accuracy keyed by (stage index, depth index, rate index)
    std::vector<double> mean_acc(stages.size() * depths.size() * rates.size(), 0.0);
    const auto cell = [&](std::size_t si, std::size_t di, std::size_t ri) {
        return (si * depths.size() + di) * rates.size() + ri;
    };

    for (std::size_t di = 0; di < depths.size(); ++di) {
        for (std::size_t ri = 0; ri < rates.size(); ++ri) {
            for (std::size_t fi = 0; fi < folds.size(); ++fi) {
                std::vector<int> train_rows;
                for (std::size_t other = 0; other < folds.size(); ++other)
                    if (other != fi)
                        train_rows.insert(train_rows.end(), folds[other].begin(),
                                          folds[other].end());
                std::sort(train_rows.begin(), train_rows.end());
                const auto& val_rows = folds[fi];

                Eigen::MatrixXd x_train(train_rows.size(), X.cols());
                Eigen::VectorXd y_train(train_rows.size());
                for (std::size_t i = 0; i < train_rows.size(); ++i) {
                    x_train.row(static_cast<Eigen::Index>(i)) = X.row(train_rows[i]);
                    y_train(static_cast<Eigen::Index>(i)) = y(train_rows[i]);
                }

                GbdtConfig config;
                config.n_estimators = stages.back();
                config.max_depth = depths[di];
                config.learning_rate = rates[ri];
                config.min_leaf = cv.min_leaf;
                config.max_bins = cv.max_bins;
                config.lambda = cv.lambda;
                config.exact_splits = cv.exact_splits;
                const GbdtModel fit = fit_gbdt(x_train, y_train, config);

                // shorter fits are prefixes of this one: score checkpoints as
                // validation scores accumulate tree by tree
                Eigen::VectorXd f_val =
                    Eigen::VectorXd::Constant(static_cast<Eigen::Index>(val_rows.size()),
                                              fit.base_score);
                std::size_t next_stage = 0;
                for (std::size_t m = 0; m < fit.trees.size(); ++m) {
                    for (std::size_t i = 0; i < val_rows.size(); ++i)
                        f_val(static_cast<Eigen::Index>(i)) +=
                            config.learning_rate *
                            fit.trees[m].value_for(X.row(val_rows[i]));
                    while (next_stage < stages.size() &&
                           static_cast<int>(m + 1) == stages[next_stage]) {
                        int correct = 0;
                        for (std::size_t i = 0; i < val_rows.size(); ++i) {
                            const bool predicted_win = f_val(static_cast<Eigen::Index>(i)) > 0.0;
                            if (predicted_win == (y(val_rows[i]) == 1.0)) ++correct;
                        }
                        mean_acc[cell(next_stage, di, ri)] +=
                            static_cast<double>(correct) /
                            static_cast<double>(val_rows.size()) /
                            static_cast<double>(cv.folds);
                        ++next_stage;
                    }
                }
            }
        }
    }

    GbdtCvResult result;
    result.best_accuracy = -1.0;
    for (std::size_t si = 0; si < stages.size(); ++si)
        for (std::size_t di = 0; di < depths.size(); ++di)
            for (std::size_t ri = 0; ri < rates.size(); ++ri) {
                GbdtCvCell row;
                row.n_estimators = stages[si];
                row.max_depth = depths[di];
                row.learning_rate = rates[ri];
                row.mean_accuracy = mean_acc[cell(si, di, ri)];
                result.table.push_back(row);
                if (row.mean_accuracy > result.best_accuracy) {
                    result.best_accuracy = row.mean_accuracy;
                    result.best_config.n_estimators = row.n_estimators;
                    result.best_config.max_depth = row.max_depth;
                    result.best_config.learning_rate = row.learning_rate;
                    result.best_config.min_leaf = cv.min_leaf;
                    result.best_config.max_bins = cv.max_bins;
                    result.best_config.lambda = cv.lambda;
                    result.best_config.exact_splits = cv.exact_splits;
                }
            }

    result.model = fit_gbdt(X, y, result.best_config, std::move(feature_names));
    return result;
}

}  // namespace courtaudit
