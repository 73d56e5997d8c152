#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace courtaudit {

// Quantile-quantile comparison of a p-value collection against Uniform(0, 1).
struct QqResult {
    std::vector<double> expected;  // plotting positions (i - 0.5) / K, ascending
    std::vector<double> observed;  // p-values sorted ascending
    // Pearson correlation between expected and observed quantiles.
    // Missing when K < 2 or the observed values have zero variance.
    std::optional<double> uniformity_r;
};

QqResult qq_uniform(const std::vector<double>& pvalues);

// Pearson correlation of two equal-length series; missing on degenerate input.
std::optional<double> pearson_r(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace courtaudit
