#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "courtaudit/types.hpp"

namespace courtaudit {

// Days of history excluded before a decision; history-derived fields only use
// cases decided strictly more than this many days earlier.
inline constexpr int kHistoryGuardDays = 60;

struct FeatureVector {
    double decision_date = 0.0;            // calendar years, e.g. 1987.45
    double experience = 0.0;               // years from appointment to the cutoff
    std::optional<double> win_rate;        // missing when the judge has no prior history
    std::optional<double> workload;        // prior cases per year since appointment
    int gender_male = 0;
    int party_republican = 0;
    int promoted = 0;
    std::array<int, kNumCircuits> circuit_onehot{};  // ninth circuit held out
    CaseType case_type = CaseType::other;  // routing tag, not a numeric feature
    std::size_t prior_case_count = 0;

    bool has_history() const { return win_rate.has_value(); }
};

// One-hot position for a circuit with the ninth circuit as the held-out
// reference; returns -1 for the ninth.
int circuit_onehot_index(Circuit c);

// Names of the numeric biographic features, in the order produced by
// to_numeric_row: decision_date, experience, win_rate, workload, gender_male,
// party_republican, promoted, then the 12 circuit indicators.
std::vector<std::string> biographic_feature_names();

// Flattens to numeric values; throws if history fields are missing.
std::vector<double> to_numeric_row(const FeatureVector& f);

// History-derived fields use only the judge's cases decided strictly more
// than kHistoryGuardDays before the target date; fixed effects are read as of
// that same cutoff.
FeatureVector compute_features(const Dataset& data, const CaseRecord& target);

}  // namespace courtaudit
