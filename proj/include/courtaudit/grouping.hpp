#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "courtaudit/types.hpp"

namespace courtaudit {

// Grouping dimensions; combine with |.
enum GroupBy : unsigned {
    kGroupNone = 0,
    kGroupJudge = 1u << 0,
    kGroupDecade = 1u << 1,
    kGroupCircuit = 1u << 2,
    kGroupCaseType = 1u << 3,
    kGroupEntityLabel = 1u << 4,
};

struct GroupKey {
    std::optional<std::string> judge_id;
    std::optional<int> decade;
    std::optional<Circuit> circuit;
    std::optional<CaseType> case_type;
    std::optional<EntityLabel> entity_label;

    auto operator<=>(const GroupKey&) const = default;
    std::string label() const;
};

struct CaseGroup {
    GroupKey key;
    std::vector<std::size_t> case_indices;  // into Dataset::cases
};

struct GroupingResult {
    std::vector<CaseGroup> groups;       // sorted by key
    std::size_t dropped_missing_entity = 0;  // cases excluded by entity grouping
};

// Partitions the retained cases by the requested keys. Grouping by
// entity_label drops cases without one (the count is reported); all other
// keys are derivable for every case. Empty key set yields a single group.
GroupingResult group_cases(const Dataset& data, unsigned keys);

}  // namespace courtaudit
