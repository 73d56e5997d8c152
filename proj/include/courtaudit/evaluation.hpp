#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace courtaudit {

struct CasePrediction {
    std::string case_id;
    std::string judge_id;
    double probability = 0.0;
    int label = 0;
};

struct BinStat {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
    std::optional<double> accuracy;        // missing for empty bins
    std::optional<double> bootstrap_mean;  // across resamples that hit the bin
    std::optional<double> bootstrap_std;   // sample std across those resamples
};

// Accuracy of thresholded predictions (win iff probability > 0.5), overall and
// within the five probability quintiles, with seeded bootstrap error bars.
struct PredictionEval {
    std::vector<CasePrediction> per_case;
    std::array<BinStat, 5> bins{};
    double overall_accuracy = 0.0;
    int n_bootstrap = 0;

    std::string to_json() const;
    std::string bins_to_csv() const;
    void write_json(const std::filesystem::path& path) const;
    void write_bins_csv(const std::filesystem::path& path) const;
};

PredictionEval bin_accuracy(std::vector<CasePrediction> per_case, int n_bootstrap = 100,
                            std::uint64_t seed = 0);

enum class PredictabilityFlag { under, within, over };
std::string to_string(PredictabilityFlag flag);

struct JudgeSignificanceRecord {
    std::string judge_id;
    int n_balanced = 0;
    int n_correct = 0;
    double accuracy = 0.0;
    double ci_low = 0.0;   // largest accuracy still flagged under, as a fraction
    double ci_high = 0.0;  // smallest accuracy already flagged over, as a fraction
    double p_raw = 1.0;
    double p_bh = 1.0;
    PredictabilityFlag flag = PredictabilityFlag::within;
};

struct SignificanceRepetition {
    int repetition = 0;
    std::vector<JudgeSignificanceRecord> per_judge;  // sorted by judge_id
    int n_over = 0;
    int n_under = 0;
    int n_bh_flagged = 0;
    double fraction_flagged_raw = 0.0;
    double fraction_flagged_bh = 0.0;
};

// Per-judge predictability against coin-flip accuracy: confidently predicted
// cases only (|probability - 0.5| >= kappa), per-judge balanced down-sampling
// repeated n_repetitions times, exact two-sided binomial tests against
// Binomial(n, 0.5) with central (1 - alpha) count bounds, and a
// Benjamini-Hochberg pass across judges inside every repetition.
struct JudgeSignificance {
    double kappa = 0.025;
    double alpha = 0.10;
    int min_cases = 50;
    int n_repetitions = 30;
    int n_qualified = 0;
    std::vector<SignificanceRepetition> repetitions;
    double mean_fraction_raw = 0.0;
    double std_fraction_raw = 0.0;
    double mean_fraction_bh = 0.0;
    double std_fraction_bh = 0.0;

    std::string to_json() const;
    std::string to_csv() const;  // one row per (repetition, judge)
    void write_json(const std::filesystem::path& path) const;
    void write_csv(const std::filesystem::path& path) const;
};

JudgeSignificance judge_significance(const std::vector<CasePrediction>& per_case,
                                     int min_cases = 50, double kappa = 0.025,
                                     double alpha = 0.10, int n_repetitions = 30,
                                     std::uint64_t seed = 0);

}  // namespace courtaudit
