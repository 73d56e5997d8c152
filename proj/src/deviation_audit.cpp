#include "courtaudit/deviation_audit.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "courtaudit/binomial.hpp"
#include "courtaudit/corrections.hpp"
#include "courtaudit/text_io.hpp"

namespace courtaudit {

using nlohmann::json;

std::string to_string(DeviationFlag f) {
    switch (f) {
        case DeviationFlag::below: return "below";
        case DeviationFlag::within: return "within";
        case DeviationFlag::above: return "above";
    }
    return "?";
}

DeviationAudit judge_deviation_test(const Dataset& data, std::optional<double> p0,
                                    double alpha) {
    DeviationAudit audit;
    audit.p0 = p0 ? *p0 : data.pooled_win_rate();
    audit.alpha = alpha;
    if (!(audit.p0 > 0.0 && audit.p0 < 1.0))
        throw std::invalid_argument("judge_deviation_test: p0 must be inside (0, 1)");

    std::map<std::string, std::pair<std::size_t, std::size_t>> tallies;  // judge -> (n, k)
    for (const auto& c : data.cases) {
        auto& [n, k] = tallies[c.judge_id];
        ++n;
        k += static_cast<std::size_t>(c.outcome);
    }
    for (const auto& [judge_id, nk] : tallies) {
        DeviationEntry e;
        e.judge_id = judge_id;
        e.n = nk.first;
        e.k = nk.second;
        e.win_rate = static_cast<double>(e.k) / static_cast<double>(e.n);
        e.p_raw = binomial_two_sided(static_cast<std::int64_t>(e.k),
                                     static_cast<std::int64_t>(e.n), audit.p0);
        if (e.p_raw <= alpha)
            e.flag = e.win_rate > audit.p0 ? DeviationFlag::above : DeviationFlag::below;
        audit.entries.push_back(std::move(e));
    }
    return audit;
}

std::string DeviationAudit::to_csv() const {
    std::string out = "judge_id,n,k,win_rate,p_raw,flag\n";
    for (const auto& e : entries) {
        out += e.judge_id + ',' + std::to_string(e.n) + ',' + std::to_string(e.k) + ',' +
               format_double(e.win_rate) + ',' + format_double(e.p_raw) + ',' +
               to_string(e.flag) + '\n';
    }
    return out;
}

void DeviationAudit::write_csv(const std::filesystem::path& path) const {
    write_file_atomic(path, to_csv());
}

DeviationSummary deviation_summary(const DeviationAudit& audit, std::size_t bins) {
    if (audit.entries.empty())
        throw std::invalid_argument("deviation_summary: no entries");
    if (bins == 0) throw std::invalid_argument("deviation_summary: bins must be positive");

    DeviationSummary s;
    s.n_judges = audit.entries.size();
    s.p0 = audit.p0;
    s.alpha = audit.alpha;

    s.bin_edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        s.bin_edges[i] = static_cast<double>(i) / static_cast<double>(bins);
    s.observed_counts.assign(bins, 0);
    s.null_expected_counts.assign(bins, 0.0);

    auto bin_of = [bins](double rate) {
        auto b = static_cast<std::size_t>(rate * static_cast<double>(bins));
        return std::min(b, bins - 1);  // rate 1.0 lands in the last bin
    };

    std::vector<double> ps;
    ps.reserve(s.n_judges);
    for (const auto& e : audit.entries) {
        ps.push_back(e.p_raw);
        s.n_below += e.flag == DeviationFlag::below;
        s.n_above += e.flag == DeviationFlag::above;
        ++s.observed_counts[bin_of(e.win_rate)];
        // exact null overlay: spread this judge's Binomial(n, p0) mass
        for (std::size_t k = 0; k <= e.n; ++k) {
            const double mass = binomial_pmf(static_cast<std::int64_t>(k),
                                             static_cast<std::int64_t>(e.n), audit.p0);
            const double rate = static_cast<double>(k) / static_cast<double>(e.n);
            s.null_expected_counts[bin_of(rate)] += mass;
        }
    }
    s.fraction_significant =
        static_cast<double>(s.n_below + s.n_above) / static_cast<double>(s.n_judges);
    const auto bh = correct_pvalues(ps, Correction::benjamini_hochberg, audit.alpha);
    s.fraction_significant_bh =
        static_cast<double>(bh.n_rejected) / static_cast<double>(s.n_judges);
    return s;
}

std::string DeviationSummary::to_json() const {
    json j;
    j["n_judges"] = n_judges;
    j["p0"] = p0;
    j["alpha"] = alpha;
    j["n_below"] = n_below;
    j["n_above"] = n_above;
    j["fraction_significant"] = fraction_significant;
    j["fraction_significant_bh"] = fraction_significant_bh;
    j["bin_edges"] = bin_edges;
    j["observed_counts"] = observed_counts;
    j["null_expected_counts"] = null_expected_counts;
    return j.dump(2);
}

std::string DeviationSummary::histogram_to_csv() const {
    std::string out = "bin_lo,bin_hi,observed,null_expected\n";
    for (std::size_t i = 0; i < observed_counts.size(); ++i) {
        out += format_double(bin_edges[i]) + ',' + format_double(bin_edges[i + 1]) + ',' +
               std::to_string(observed_counts[i]) + ',' +
               format_double(null_expected_counts[i]) + '\n';
    }
    return out;
}

void DeviationSummary::write_json(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json() + "\n");
}

void DeviationSummary::write_histogram_csv(const std::filesystem::path& path) const {
    write_file_atomic(path, histogram_to_csv());
}

}  // namespace courtaudit
