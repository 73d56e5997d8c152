#include "courtaudit/types.hpp"

#include <algorithm>
#include <array>

namespace courtaudit {

namespace {

constexpr std::array<const char*, kNumCircuitValues> kCircuitNames = {
    "dc",    "first",   "second", "third", "fourth", "fifth",    "sixth",
    "seventh", "eighth", "ninth",  "tenth", "eleventh", "twelfth",
};
constexpr std::array<const char*, kNumCaseTypes> kCaseTypeNames = {
    "civil_rights", "contract", "prisoner_petitions", "torts", "labor", "other",
};
constexpr std::array<const char*, kNumEntityLabels> kEntityNames = {
    "government", "company", "individual", "mixed",
};

template <typename Enum, std::size_t N>
Enum enum_from_string(const std::array<const char*, N>& names, const std::string& s,
                      const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (s == names[i]) return static_cast<Enum>(i);
    }
    throw std::invalid_argument(std::string("unknown ") + what + ": '" + s + "'");
}

}  // namespace

std::string to_string(Circuit c) { return kCircuitNames[static_cast<std::size_t>(c)]; }
std::string to_string(CaseType t) { return kCaseTypeNames[static_cast<std::size_t>(t)]; }
std::string to_string(EntityLabel e) { return kEntityNames[static_cast<std::size_t>(e)]; }

Circuit circuit_from_string(const std::string& s) {
    return enum_from_string<Circuit>(kCircuitNames, s, "circuit");
}
CaseType case_type_from_string(const std::string& s) {
    return enum_from_string<CaseType>(kCaseTypeNames, s, "case_type");
}
EntityLabel entity_label_from_string(const std::string& s) {
    return enum_from_string<EntityLabel>(kEntityNames, s, "entity_label");
}

const std::vector<std::size_t> Dataset::kEmptyCaseList = {};

void Dataset::build_index() {
    judge_lookup_.clear();
    case_lookup_.clear();
    cases_by_judge_.clear();
    judge_lookup_.reserve(judges.size());
    case_lookup_.reserve(cases.size());
    for (std::size_t i = 0; i < judges.size(); ++i) judge_lookup_[judges[i].judge_id] = i;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        case_lookup_[cases[i].case_id] = i;
        cases_by_judge_[cases[i].judge_id].push_back(i);
    }
    for (auto& [judge_id, indices] : cases_by_judge_) {
        std::sort(indices.begin(), indices.end(), [this](std::size_t a, std::size_t b) {
            const auto& ca = cases[a];
            const auto& cb = cases[b];
            if (ca.decision_date != cb.decision_date) return ca.decision_date < cb.decision_date;
            return ca.case_id < cb.case_id;
        });
    }
}

const JudgeProfile* Dataset::find_judge(const std::string& judge_id) const {
    auto it = judge_lookup_.find(judge_id);
    return it == judge_lookup_.end() ? nullptr : &judges[it->second];
}

const JudgeProfile& Dataset::judge_or_throw(const std::string& judge_id) const {
    const JudgeProfile* p = find_judge(judge_id);
    if (!p) throw std::invalid_argument("unknown judge_id: '" + judge_id + "'");
    return *p;
}

const std::vector<std::size_t>& Dataset::cases_of_judge(const std::string& judge_id) const {
    auto it = cases_by_judge_.find(judge_id);
    return it == cases_by_judge_.end() ? kEmptyCaseList : it->second;
}

const CaseRecord* Dataset::find_case(const std::string& case_id) const {
    auto it = case_lookup_.find(case_id);
    return it == case_lookup_.end() ? nullptr : &cases[it->second];
}

std::vector<std::string> Dataset::judge_ids_sorted() const {
    std::vector<std::string> ids;
    ids.reserve(judges.size());
    for (const auto& j : judges) ids.push_back(j.judge_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

double Dataset::pooled_win_rate() const {
    if (cases.empty()) throw std::invalid_argument("pooled_win_rate: empty dataset");
    double wins = 0.0;
    for (const auto& c : cases) wins += c.outcome;
    return wins / static_cast<double>(cases.size());
}

}  // namespace courtaudit
