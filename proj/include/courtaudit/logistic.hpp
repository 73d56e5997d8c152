#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace courtaudit {

// L2-penalized logistic regression fitted by damped Newton iterations, with
// Wald inference from the inverse penalized observed information. The
// intercept is estimated but never penalized. pseudo_r2 is McFadden's
// 1 - ll / ll_null, computed from unpenalized log-likelihoods.
struct LogisticFit {
    std::vector<std::string> feature_names;  // "intercept" first
    Eigen::VectorXd coef;
    Eigen::VectorXd std_err;
    Eigen::VectorXd z_value;
    Eigen::VectorXd p_value;
    Eigen::VectorXd ci_low;
    Eigen::VectorXd ci_high;
    double log_likelihood = 0.0;
    double null_log_likelihood = 0.0;
    double pseudo_r2 = 0.0;
    double l2_weight = 0.0;
    int n_iterations = 0;

    // Probabilities for rows matching the training schema (no intercept
    // column; it is added internally).
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;

    // coef / std err / z / p / 95% interval rows, one per term.
    std::string coefficient_table_csv() const;
    void write_csv(const std::filesystem::path& path) const;
};

// Unpenalized log-likelihood of labels under probabilities sigmoid(eta).
double logistic_log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y);

// Fits intercept + coefficients on X (rows x features, without an intercept
// column). Throws std::runtime_error on perfect separation (diverging
// coefficients, naming the offending terms) and on a singular information
// matrix; std::invalid_argument on malformed input.
LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         double l2_weight,
                         std::vector<std::string> feature_names = {});

}  // namespace courtaudit
