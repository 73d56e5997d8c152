#include "courtaudit/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "courtaudit/features.hpp"

namespace courtaudit {

DesignMatrix DesignMatrix::subset(const std::vector<int>& rows) const {
    DesignMatrix out;
    out.feature_names = feature_names;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    out.case_ids.reserve(rows.size());
    out.judge_ids.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int r = rows[i];
        if (r < 0 || r >= n_rows()) throw std::invalid_argument("row index out of range");
        out.X.row(static_cast<Eigen::Index>(i)) = X.row(r);
        out.y(static_cast<Eigen::Index>(i)) = y(r);
        out.case_ids.push_back(case_ids[static_cast<std::size_t>(r)]);
        out.judge_ids.push_back(judge_ids[static_cast<std::size_t>(r)]);
    }
    return out;
}

DesignMatrix biographic_design(const Dataset& data, std::optional<CaseType> type) {
    DesignMatrix out;
    out.feature_names = biographic_feature_names();
    std::vector<std::vector<double>> rows;
    std::vector<double> outcomes;
    for (const auto& c : data.cases) {
        if (type && c.case_type != *type) continue;
        const FeatureVector f = compute_features(data, c);
        if (!f.has_history()) continue;
        rows.push_back(to_numeric_row(f));
        outcomes.push_back(static_cast<double>(c.outcome));
        out.case_ids.push_back(c.case_id);
        out.judge_ids.push_back(c.judge_id);
    }
    out.X.resize(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(out.feature_names.size()));
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        out.y(static_cast<Eigen::Index>(i)) = outcomes[i];
    }
    return out;
}

DesignMatrix embedding_design(const Dataset& data, std::optional<CaseType> type,
                              const std::map<std::string, Eigen::VectorXd>& embeddings) {
    if (embeddings.empty()) throw std::invalid_argument("no embedding rows supplied");
    const Eigen::Index dim = embeddings.begin()->second.size();
    for (const auto& [id, v] : embeddings)
        if (v.size() != dim)
            throw std::invalid_argument("embedding rows have inconsistent lengths");

    DesignMatrix out;
    for (Eigen::Index d = 0; d < dim; ++d)
        out.feature_names.push_back("embedding_" + std::to_string(d));
    out.feature_names.push_back("decision_date");
    for (int i = 0; i < kNumCircuitValues; ++i) {
        const auto c = static_cast<Circuit>(i);
        if (c == Circuit::ninth) continue;
        out.feature_names.push_back("circuit_" + to_string(c));
    }

    std::vector<std::vector<double>> rows;
    std::vector<double> outcomes;
    for (const auto& c : data.cases) {
        if (type && c.case_type != *type) continue;
        const auto it = embeddings.find(c.judge_id);
        if (it == embeddings.end()) continue;
        std::vector<double> row(out.feature_names.size(), 0.0);
        for (Eigen::Index d = 0; d < dim; ++d) row[static_cast<std::size_t>(d)] = it->second(d);
        row[static_cast<std::size_t>(dim)] = c.decision_date.year_fraction();
        const int pos = circuit_onehot_index(c.circuit);
        if (pos >= 0) row[static_cast<std::size_t>(dim) + 1 + static_cast<std::size_t>(pos)] = 1.0;
        rows.push_back(std::move(row));
        outcomes.push_back(static_cast<double>(c.outcome));
        out.case_ids.push_back(c.case_id);
        out.judge_ids.push_back(c.judge_id);
    }
    out.X.resize(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(out.feature_names.size()));
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        out.y(static_cast<Eigen::Index>(i)) = outcomes[i];
    }
    return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
    if (X.rows() < 2) throw std::invalid_argument("need at least two rows to standardize");
    Standardizer s;
    s.mean = X.colwise().mean();
    s.std_dev.resize(X.cols());
    const double n = static_cast<double>(X.rows());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - s.mean(j)).square().sum() / n;
        const double sd = std::sqrt(var);
        s.std_dev(j) = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& X) const {
    if (X.cols() != mean.size())
        throw std::invalid_argument("column count does not match fitted statistics");
    Eigen::MatrixXd out = X;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        out.col(j) = (X.col(j).array() - mean(j)) / std_dev(j);
    return out;
}

std::vector<int> balance_downsample(const Eigen::VectorXd& labels, Rng& rng) {
    std::vector<int> wins, losses;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const double v = labels(i);
        if (v != 0.0 && v != 1.0) throw std::invalid_argument("labels must be 0 or 1");
        (v == 1.0 ? wins : losses).push_back(static_cast<int>(i));
    }
    if (wins.empty() || losses.empty())
        throw std::invalid_argument("both classes must be present to balance");

    auto& majority = wins.size() > losses.size() ? wins : losses;
    const std::size_t target = std::min(wins.size(), losses.size());
    std::vector<int> kept;
    if (majority.size() > target) {
        const auto picks =
            rng.sample_without_replacement(majority.size(), target);
        for (const std::size_t p : picks) kept.push_back(majority[p]);
    } else {
        kept = majority;
    }
    auto& minority = wins.size() > losses.size() ? losses : wins;
    kept.insert(kept.end(), minority.begin(), minority.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::pair<std::vector<int>, std::vector<int>> split_train_test(int n_rows, double ratio,
                                                               Rng& rng) {
    if (n_rows < 2) throw std::invalid_argument("need at least two rows to split");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("split ratio must lie in (0, 1)");
    const int n_train = static_cast<int>(std::llround(ratio * n_rows));
    if (n_train < 1 || n_train >= n_rows)
        throw std::invalid_argument("split leaves an empty side");

    std::vector<int> order(static_cast<std::size_t>(n_rows));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<int> train(order.begin(), order.begin() + n_train);
    std::vector<int> test(order.begin() + n_train, order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

}  // namespace courtaudit
