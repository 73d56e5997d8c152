#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "courtaudit/types.hpp"

namespace courtaudit {

enum class DeviationFlag { below, within, above };

std::string to_string(DeviationFlag f);

struct DeviationEntry {
    std::string judge_id;
    std::size_t n = 0;       // career case count
    std::size_t k = 0;       // plaintiff wins
    double win_rate = 0.0;   // k / n
    double p_raw = 1.0;      // exact two-sided test against p0
    DeviationFlag flag = DeviationFlag::within;
};

struct DeviationAudit {
    double p0 = 0.25;    // null win rate actually used
    double alpha = 0.10;
    std::vector<DeviationEntry> entries;  // sorted by judge_id

    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;
};

// Career win rate of every judge with at least one case against
// Binomial(n, p0). When p0 is not supplied it defaults to the pooled
// plaintiff win rate of the dataset.
DeviationAudit judge_deviation_test(const Dataset& data,
                                    std::optional<double> p0 = std::nullopt,
                                    double alpha = 0.10);

struct DeviationSummary {
    std::size_t n_judges = 0;
    double p0 = 0.25;
    double alpha = 0.10;
    std::size_t n_below = 0;
    std::size_t n_above = 0;
    double fraction_significant = 0.0;     // raw flags
    double fraction_significant_bh = 0.0;  // after Benjamini-Hochberg at alpha
    std::vector<double> bin_edges;             // bins + 1 edges on [0, 1]
    std::vector<std::size_t> observed_counts;  // judges per win-rate bin
    // Expected counts under the null: each judge contributes the exact
    // Binomial(n_j, p0) probability mass landing in each bin.
    std::vector<double> null_expected_counts;

    std::string to_json() const;
    std::string histogram_to_csv() const;
    void write_json(const std::filesystem::path& path) const;
    void write_histogram_csv(const std::filesystem::path& path) const;
};

DeviationSummary deviation_summary(const DeviationAudit& audit, std::size_t bins = 30);

}  // namespace courtaudit
