#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace courtaudit {

enum class ShapleyMethod { exact_enumeration, permutation_sampling };
std::string to_string(ShapleyMethod method);

// Per-case additive attributions. The value of a feature coalition is the
// model's expected output with out-of-coalition features replaced by
// background-sample values; base_value is the expectation with no features
// fixed (the mean model output over the background).
struct ShapleyReport {
    std::vector<std::string> feature_names;
    Eigen::MatrixXd values;       // explained rows x features
    Eigen::VectorXd predictions;  // model output per explained row
    double base_value = 0.0;
    ShapleyMethod method = ShapleyMethod::exact_enumeration;
    int n_samples = 0;  // permutations per row in sampling mode
    std::optional<Eigen::MatrixXd> mc_std_err;  // sampling mode only

    // mean absolute attribution per feature across explained rows
    Eigen::VectorXd mean_abs() const;
    std::string to_csv() const;
};

using PredictFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

// Exact mode enumerates all coalitions (at most 15 features); sampling mode
// averages marginal contributions over seeded random feature orderings, which
// telescopes so attributions sum exactly to prediction - base_value.
ShapleyReport shapley_importance(const PredictFn& model, const Eigen::MatrixXd& rows,
                                 const Eigen::MatrixXd& background,
                                 ShapleyMethod method, int n_samples,
                                 std::uint64_t seed,
                                 std::vector<std::string> feature_names = {});

}  // namespace courtaudit
