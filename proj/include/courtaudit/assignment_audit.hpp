#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "courtaudit/corrections.hpp"
#include "courtaudit/qq.hpp"
#include "courtaudit/types.hpp"

namespace courtaudit {

// Which case attribute plays the role of the assignment label.
enum class LabelKind { case_type, entity_label };

LabelKind label_kind_from_string(const std::string& s);
std::string to_string(LabelKind k);

struct BaseRateKey {
    Circuit circuit = Circuit::dc;
    int decade = 0;
    auto operator<=>(const BaseRateKey&) const = default;
};

struct BaseRateContext {
    std::map<std::string, std::size_t> totals;  // label -> case count
    std::map<std::string, double> rates;        // label -> fraction, sums to 1
    std::size_t total_cases = 0;
    bool retained = false;  // total_cases >= the minimum context size
};

struct BaseRateTable {
    LabelKind kind = LabelKind::case_type;
    std::size_t min_context_cases = 100;
    std::map<BaseRateKey, BaseRateContext> contexts;

    std::size_t n_retained() const;
    std::size_t n_dropped() const;
};

// Label prevalence per (circuit, decade). Cases without an entity label are
// skipped entirely when kind == entity_label. Contexts below
// min_context_cases stay in the table but are flagged as not retained and
// excluded from testing.
BaseRateTable compute_base_rates(const Dataset& data, LabelKind kind,
                                 std::size_t min_context_cases = 100);

struct AuditEntry {
    std::string judge_id;
    Circuit circuit = Circuit::dc;
    int decade = 0;
    std::string label;
    std::size_t n = 0;      // judge's (labeled) cases in this circuit-decade
    std::size_t k = 0;      // of those, cases carrying this label
    double base_rate = 0.0; // context prevalence, the null probability
    double p_raw = 1.0;
};

struct AuditReport {
    LabelKind label_kind = LabelKind::case_type;
    double alpha = 0.05;
    std::size_t min_judgments = 10;
    std::size_t min_context_cases = 100;
    std::vector<AuditEntry> entries;  // sorted by (judge, circuit, decade, label)
    std::map<Correction, CorrectionResult> corrected;
    QqResult qq;

    std::size_t n_tests() const { return entries.size(); }
    double raw_fraction_below_alpha() const;

    std::string to_json() const;
    std::string to_csv() const;     // one row per test, all three adjustments
    std::string qq_to_csv() const;  // theoretical,empirical pairs

    void write_json(const std::filesystem::path& path) const;
    void write_csv(const std::filesystem::path& path) const;
    void write_qq_csv(const std::filesystem::path& path) const;
};

// One exact two-sided binomial test per (judge, circuit, decade, label):
// the judge must have at least min_judgments (labeled) cases in a retained
// context, and every context label with prevalence strictly inside (0, 1)
// is tested, including labels the judge never saw (k = 0).
AuditReport audit_assignment(const Dataset& data, LabelKind kind,
                             std::size_t min_judgments = 10, double alpha = 0.05,
                             std::size_t min_context_cases = 100);

}  // namespace courtaudit
