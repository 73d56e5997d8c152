#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "courtaudit/rng.hpp"
#include "courtaudit/types.hpp"

namespace courtaudit {

// Rows are cases, columns are named numeric features; y holds binary outcomes.
// Row metadata (case and judge ids) travels with the matrix so downstream
// per-judge evaluation can attribute predictions.
struct DesignMatrix {
    std::vector<std::string> feature_names;
    std::vector<std::string> case_ids;
    std::vector<std::string> judge_ids;
    Eigen::MatrixXd X;
    Eigen::VectorXd y;

    int n_rows() const { return static_cast<int>(X.rows()); }
    int n_features() const { return static_cast<int>(X.cols()); }

    DesignMatrix subset(const std::vector<int>& rows) const;
};

// Biographic feature rows (decision date, experience, win rate, workload,
// fixed effects, circuit indicators) for every case of the given type with
// available history; pass nullopt to keep all case types.
DesignMatrix biographic_design(const Dataset& data, std::optional<CaseType> type);

// Per-judge embedding rows plus decision date and circuit indicators as
// controls; cases whose judge has no embedding row are dropped.
DesignMatrix embedding_design(const Dataset& data, std::optional<CaseType> type,
                              const std::map<std::string, Eigen::VectorXd>& embeddings);

// Per-column centering and scaling, fitted on training rows only and applied
// unchanged to any later rows. Constant columns are centered but left
// unscaled.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd std_dev;

    static Standardizer fit(const Eigen::MatrixXd& X);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
};

// Down-samples the majority class uniformly at random to the minority count;
// returns sorted row indices whose label mean is exactly 0.5. Throws when only
// one class is present.
std::vector<int> balance_downsample(const Eigen::VectorXd& labels, Rng& rng);

// Seeded uniform split into disjoint, exhaustive (train, test) index sets with
// round(ratio * n) training rows; both sides must be non-empty.
std::pair<std::vector<int>, std::vector<int>> split_train_test(int n_rows, double ratio,
                                                               Rng& rng);

}  // namespace courtaudit
