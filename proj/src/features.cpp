#include "courtaudit/features.hpp"

namespace courtaudit {

int circuit_onehot_index(Circuit c) {
    if (c == Circuit::ninth) return -1;
    const int i = static_cast<int>(c);
    const int ninth = static_cast<int>(Circuit::ninth);
    return i < ninth ? i : i - 1;
}

std::vector<std::string> biographic_feature_names() {
    std::vector<std::string> names = {"decision_date", "experience", "win_rate",
                                      "workload",      "gender_male", "party_republican",
                                      "promoted"};
    for (int i = 0; i < kNumCircuitValues; ++i) {
        const auto c = static_cast<Circuit>(i);
        if (c == Circuit::ninth) continue;
        names.push_back("circuit_" + to_string(c));
    }
    return names;
}

std::vector<double> to_numeric_row(const FeatureVector& f) {
    if (!f.win_rate || !f.workload)
        throw std::invalid_argument("to_numeric_row: history fields are missing");
    std::vector<double> row = {f.decision_date,
                               f.experience,
                               *f.win_rate,
                               *f.workload,
                               static_cast<double>(f.gender_male),
                               static_cast<double>(f.party_republican),
                               static_cast<double>(f.promoted)};
    for (int v : f.circuit_onehot) row.push_back(static_cast<double>(v));
    return row;
}

FeatureVector compute_features(const Dataset& data, const CaseRecord& target) {
    const JudgeProfile& judge = data.judge_or_throw(target.judge_id);

    const Date cutoff = target.decision_date.plus_days(-kHistoryGuardDays);

    FeatureVector f;
    f.decision_date = target.decision_date.year_fraction();
    f.experience = years_between(judge.appointment_date, cutoff);
    f.gender_male = judge.gender_male;
    f.party_republican = judge.party_republican;
    f.promoted = judge.promoted_as_of(cutoff) ? 1 : 0;
    f.case_type = target.case_type;
    const int onehot = circuit_onehot_index(target.circuit);
    if (onehot >= 0) f.circuit_onehot[static_cast<std::size_t>(onehot)] = 1;

    // Strictly more than kHistoryGuardDays before the decision, i.e. date < cutoff.
    std::size_t prior = 0;
    double wins = 0.0;
    for (std::size_t idx : data.cases_of_judge(target.judge_id)) {
        const auto& c = data.cases[idx];
        if (c.decision_date >= cutoff) break;  // sorted by date
        ++prior;
        wins += c.outcome;
    }
    f.prior_case_count = prior;
    if (prior > 0) {
        f.win_rate = wins / static_cast<double>(prior);
        const double years = years_between(judge.appointment_date, cutoff);
        f.workload = years > 0 ? static_cast<double>(prior) / years
                               : static_cast<double>(prior);
    }
    return f;
}

}  // namespace courtaudit
