#include "courtaudit/grouping.hpp"

#include <map>

namespace courtaudit {

std::string GroupKey::label() const {
    std::string out;
    auto add = [&out](const std::string& part) {
        if (!out.empty()) out += '/';
        out += part;
    };
    if (judge_id) add("judge=" + *judge_id);
    if (decade) add("decade=" + std::to_string(*decade));
    if (circuit) add("circuit=" + to_string(*circuit));
    if (case_type) add("case_type=" + to_string(*case_type));
    if (entity_label) add("entity=" + to_string(*entity_label));
    if (out.empty()) out = "all";
    return out;
}

GroupingResult group_cases(const Dataset& data, unsigned keys) {
    GroupingResult result;
    std::map<GroupKey, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < data.cases.size(); ++i) {
        const auto& c = data.cases[i];
        if ((keys & kGroupEntityLabel) && !c.entity_label) {
            ++result.dropped_missing_entity;
            continue;
        }
        GroupKey key;
        if (keys & kGroupJudge) key.judge_id = c.judge_id;
        if (keys & kGroupDecade) key.decade = c.decade();
        if (keys & kGroupCircuit) key.circuit = c.circuit;
        if (keys & kGroupCaseType) key.case_type = c.case_type;
        if (keys & kGroupEntityLabel) key.entity_label = c.entity_label;
        buckets[key].push_back(i);
    }
    result.groups.reserve(buckets.size());
    for (auto& [key, indices] : buckets) result.groups.push_back({key, std::move(indices)});
    return result;
}

}  // namespace courtaudit
