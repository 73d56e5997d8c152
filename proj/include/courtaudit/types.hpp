#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "courtaudit/date.hpp"

namespace courtaudit {

// The 12 geographic circuits plus D.C.
enum class Circuit {
    dc,
    first,
    second,
    third,
    fourth,
    fifth,
    sixth,
    seventh,
    eighth,
    ninth,
    tenth,
    eleventh,
    twelfth,
};
inline constexpr int kNumCircuits = 12;       // one-hot width: all values minus the reference
inline constexpr int kNumCircuitValues = 13;  // D.C. plus the numbered circuits

enum class CaseType {
    civil_rights,
    contract,
    prisoner_petitions,
    torts,
    labor,
    other,
};
inline constexpr int kNumCaseTypes = 6;

enum class EntityLabel {
    government,
    company,
    individual,
    mixed,
};
inline constexpr int kNumEntityLabels = 4;

std::string to_string(Circuit c);
std::string to_string(CaseType t);
std::string to_string(EntityLabel e);
Circuit circuit_from_string(const std::string& s);
CaseType case_type_from_string(const std::string& s);
EntityLabel entity_label_from_string(const std::string& s);

struct CaseRecord {
    std::string case_id;
    std::string judge_id;
    Date decision_date;
    Circuit circuit = Circuit::dc;
    CaseType case_type = CaseType::other;
    int outcome = 0;  // 1 = plaintiff won
    std::optional<EntityLabel> entity_label;
    std::vector<std::string> citations;

    int decade() const { return decision_date.year() / 10 * 10; }
};

struct JudgeProfile {
    std::string judge_id;
    int gender_male = 0;
    int party_republican = 0;
    Date appointment_date;
    std::optional<Date> promotion_date;

    bool promoted_as_of(Date when) const {
        return promotion_date.has_value() && *promotion_date <= when;
    }
};

// Immutable after build_index(); all readers may share it.
class Dataset {
public:
    std::vector<CaseRecord> cases;
    std::vector<JudgeProfile> judges;
    std::map<std::string, std::string> provenance;

    // Builds judge lookup and per-judge case lists (sorted by decision date,
    // ties by case_id). Call after mutating cases/judges.
    void build_index();

    const JudgeProfile* find_judge(const std::string& judge_id) const;
    const JudgeProfile& judge_or_throw(const std::string& judge_id) const;

    // Indices into cases, sorted by (decision_date, case_id). Empty vector if
    // the judge has no cases.
    const std::vector<std::size_t>& cases_of_judge(const std::string& judge_id) const;

    const CaseRecord* find_case(const std::string& case_id) const;

    std::vector<std::string> judge_ids_sorted() const;

    double pooled_win_rate() const;

private:
    std::unordered_map<std::string, std::size_t> judge_lookup_;
    std::unordered_map<std::string, std::size_t> case_lookup_;
    std::unordered_map<std::string, std::vector<std::size_t>> cases_by_judge_;
    static const std::vector<std::size_t> kEmptyCaseList;
};

}  // namespace courtaudit
