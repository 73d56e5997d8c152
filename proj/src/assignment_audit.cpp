#include "courtaudit/assignment_audit.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "courtaudit/binomial.hpp"
#include "courtaudit/text_io.hpp"

namespace courtaudit {

using nlohmann::json;

LabelKind label_kind_from_string(const std::string& s) {
    if (s == "case_type") return LabelKind::case_type;
    if (s == "entity_label") return LabelKind::entity_label;
    throw std::invalid_argument("unknown label kind: '" + s + "'");
}

std::string to_string(LabelKind k) {
    return k == LabelKind::case_type ? "case_type" : "entity_label";
}

namespace {

// Label of a case under the chosen kind; empty when the case carries none.
std::string label_of(const CaseRecord& c, LabelKind kind) {
    if (kind == LabelKind::case_type) return to_string(c.case_type);
    return c.entity_label ? to_string(*c.entity_label) : std::string();
}

}  // namespace

std::size_t BaseRateTable::n_retained() const {
    std::size_t n = 0;
    for (const auto& [key, ctx] : contexts) n += ctx.retained;
    return n;
}

std::size_t BaseRateTable::n_dropped() const { return contexts.size() - n_retained(); }

BaseRateTable compute_base_rates(const Dataset& data, LabelKind kind,
                                 std::size_t min_context_cases) {
    BaseRateTable table;
    table.kind = kind;
    table.min_context_cases = min_context_cases;
    for (const auto& c : data.cases) {
        const std::string label = label_of(c, kind);
        if (label.empty()) continue;
        auto& ctx = table.contexts[{c.circuit, c.decade()}];
        ++ctx.totals[label];
        ++ctx.total_cases;
    }
    for (auto& [key, ctx] : table.contexts) {
        ctx.retained = ctx.total_cases >= min_context_cases;
        for (const auto& [label, count] : ctx.totals)
            ctx.rates[label] =
                static_cast<double>(count) / static_cast<double>(ctx.total_cases);
    }
    return table;
}

AuditReport audit_assignment(const Dataset& data, LabelKind kind, std::size_t min_judgments,
                             double alpha, std::size_t min_context_cases) {
    const BaseRateTable rates = compute_base_rates(data, kind, min_context_cases);

    AuditReport report;
    report.label_kind = kind;
    report.alpha = alpha;
    report.min_judgments = min_judgments;
    report.min_context_cases = min_context_cases;

    // judge -> context -> label -> count, over labeled cases only
    std::map<std::pair<std::string, BaseRateKey>, std::map<std::string, std::size_t>> counts;
    for (const auto& c : data.cases) {
        const std::string label = label_of(c, kind);
        if (label.empty()) continue;
        ++counts[{c.judge_id, {c.circuit, c.decade()}}][label];
    }

    for (const auto& [who_where, label_counts] : counts) {
        const auto& [judge_id, key] = who_where;
        const auto ctx_it = rates.contexts.find(key);
        if (ctx_it == rates.contexts.end() || !ctx_it->second.retained) continue;
        std::size_t n = 0;
        for (const auto& [label, count] : label_counts) n += count;
        if (n < min_judgments) continue;
        for (const auto& [label, rate] : ctx_it->second.rates) {
            if (!(rate > 0.0 && rate < 1.0)) continue;  // test undefined at the edges
            const auto k_it = label_counts.find(label);
            const std::size_t k = k_it == label_counts.end() ? 0 : k_it->second;
            AuditEntry e;
            e.judge_id = judge_id;
            e.circuit = key.circuit;
            e.decade = key.decade;
            e.label = label;
            e.n = n;
            e.k = k;
            e.base_rate = rate;
            e.p_raw = binomial_two_sided(static_cast<std::int64_t>(k),
                                         static_cast<std::int64_t>(n), rate);
            report.entries.push_back(std::move(e));
        }
    }
    // counts is an ordered map, so entries are already sorted by
    // (judge, circuit, decade, label); keep that as the contract anyway
    std::sort(report.entries.begin(), report.entries.end(), [](const auto& a, const auto& b) {
        return std::tie(a.judge_id, a.circuit, a.decade, a.label) <
               std::tie(b.judge_id, b.circuit, b.decade, b.label);
    });

    if (!report.entries.empty()) {
        std::vector<double> ps;
        ps.reserve(report.entries.size());
        for (const auto& e : report.entries) ps.push_back(e.p_raw);
        for (auto method : {Correction::bonferroni, Correction::benjamini_hochberg,
                            Correction::benjamini_yekutieli})
            report.corrected.emplace(method, correct_pvalues(ps, method, alpha));
        report.qq = qq_uniform(ps);
    }
    return report;
}

double AuditReport::raw_fraction_below_alpha() const {
    if (entries.empty()) return 0.0;
    std::size_t n = 0;
    for (const auto& e : entries) n += e.p_raw < alpha;
    return static_cast<double>(n) / static_cast<double>(entries.size());
}

std::string AuditReport::to_json() const {
    json j;
    j["label_kind"] = courtaudit::to_string(label_kind);
    j["alpha"] = alpha;
    j["min_judgments"] = min_judgments;
    j["min_context_cases"] = min_context_cases;
    j["n_tests"] = n_tests();
    j["raw_fraction_below_alpha"] = raw_fraction_below_alpha();
    j["entries"] = json::array();
    for (const auto& e : entries) {
        j["entries"].push_back({{"judge_id", e.judge_id},
                                {"circuit", courtaudit::to_string(e.circuit)},
                                {"decade", e.decade},
                                {"label", e.label},
                                {"n", e.n},
                                {"k", e.k},
                                {"base_rate", e.base_rate},
                                {"p_raw", e.p_raw}});
    }
    j["corrected"] = json::object();
    for (const auto& [method, result] : corrected) {
        json m;
        m["adjusted"] = result.adjusted;
        m["reject"] = result.reject;
        m["n_rejected"] = result.n_rejected;
        m["fraction_rejected"] = entries.empty()
                                     ? 0.0
                                     : static_cast<double>(result.n_rejected) /
                                           static_cast<double>(entries.size());
        j["corrected"][courtaudit::to_string(method)] = std::move(m);
    }
    j["qq"]["pearson_r"] =
        qq.uniformity_r ? json(*qq.uniformity_r) : json(nullptr);
    return j.dump(2);
}

std::string AuditReport::to_csv() const {
    const auto* bf = corrected.count(Correction::bonferroni)
                         ? &corrected.at(Correction::bonferroni)
                         : nullptr;
    const auto* bh = corrected.count(Correction::benjamini_hochberg)
                         ? &corrected.at(Correction::benjamini_hochberg)
                         : nullptr;
    const auto* by = corrected.count(Correction::benjamini_yekutieli)
                         ? &corrected.at(Correction::benjamini_yekutieli)
                         : nullptr;
    std::string out =
        "judge_id,circuit,decade,label,n,k,base_rate,p_raw,"
        "p_bonferroni,p_benjamini_hochberg,p_benjamini_yekutieli,"
        "reject_bonferroni,reject_benjamini_hochberg,reject_benjamini_yekutieli\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        out += e.judge_id + ',' + courtaudit::to_string(e.circuit) + ',' +
               std::to_string(e.decade) + ',' + e.label + ',' + std::to_string(e.n) + ',' +
               std::to_string(e.k) + ',' + format_double(e.base_rate) + ',' +
               format_double(e.p_raw) + ',';
        out += (bf ? format_double(bf->adjusted[i]) : "") + std::string(",");
        out += (bh ? format_double(bh->adjusted[i]) : "") + std::string(",");
        out += (by ? format_double(by->adjusted[i]) : "") + std::string(",");
        out += (bf ? std::to_string(static_cast<int>(bf->reject[i])) : "") + std::string(",");
        out += (bh ? std::to_string(static_cast<int>(bh->reject[i])) : "") + std::string(",");
        out += (by ? std::to_string(static_cast<int>(by->reject[i])) : "") + std::string("\n");
    }
    return out;
}

std::string AuditReport::qq_to_csv() const {
    std::string out = "theoretical,empirical\n";
    for (std::size_t i = 0; i < qq.expected.size(); ++i)
        out += format_double(qq.expected[i]) + ',' + format_double(qq.observed[i]) + '\n';
    return out;
}

void AuditReport::write_json(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json() + "\n");
}
void AuditReport::write_csv(const std::filesystem::path& path) const {
    write_file_atomic(path, to_csv());
}
void AuditReport::write_qq_csv(const std::filesystem::path& path) const {
    write_file_atomic(path, qq_to_csv());
}

}  // namespace courtaudit
