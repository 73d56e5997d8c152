#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace courtaudit {

// Biographic profile of one judge, aligned with one embedding row.
struct JudgeAttributes {
    std::string judge_id;
    double experience = 0.0;        // years on the bench
    double win_rate = 0.0;          // career affirmance share
    double workload = 0.0;          // cases per year
    int gender_male = 0;            // 1 = male
    int party_republican = 0;       // 1 = appointed by a republican
    int promoted = 0;               // 1 = later elevated
};

// One regression of an attribute on the embedding dimensions.
struct AttributeFit {
    std::string attribute;
    std::string fit_type;           // "linear" or "logistic"
    double r2 = 0.0;                // R^2 for linear, McFadden pseudo-R^2 for logistic
    Eigen::VectorXd coefficients;   // intercept first, then one slope per dimension
};

struct BiographicsReport {
    std::vector<std::string> coefficient_names;  // "intercept", "dim_0", ...
    std::vector<AttributeFit> fits;              // fixed attribute order

    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;
};

// Regresses each judge attribute on the embedding rows: ridge linear fits with
// R^2 for the continuous attributes (experience, win_rate, workload) and
// l2-penalized logistic fits with McFadden pseudo-R^2 for the binary ones
// (gender_male, party_republican, promoted). The intercept is never penalized.
BiographicsReport explain_biographics(const Eigen::MatrixXd& embeddings,
                                      const std::vector<JudgeAttributes>& attributes,
                                      double l2 = 0.001);

}  // namespace courtaudit
