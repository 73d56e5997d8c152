#include "courtaudit/citation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "courtaudit/text_io.hpp"

namespace courtaudit {

std::vector<std::size_t> early_career_window(const Dataset& data, const std::string& judge_id,
                                             double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("early_career_window: fraction must be inside (0, 1)");
    const auto& all = data.cases_of_judge(judge_id);
    if (all.empty()) {
        data.judge_or_throw(judge_id);  // unknown judge -> throw
        throw std::invalid_argument("early_career_window: judge '" + judge_id +
                                    "' has no cases");
    }
    const auto take = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(all.size())));
    return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(take, 1))};
}

std::vector<std::string> top_cited(const Dataset& data, int as_of_year, std::size_t n_top) {
    std::map<std::string, std::size_t> received;
    for (const auto& c : data.cases) {
        if (c.decision_date.year() > as_of_year) continue;
        for (const auto& cited : c.citations) ++received[cited];
    }
    if (received.empty())
        throw std::invalid_argument("top_cited: no citations in or before " +
                                    std::to_string(as_of_year));
    std::vector<std::pair<std::string, std::size_t>> ranked(received.begin(), received.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    out.reserve(std::min(n_top, ranked.size()));
    for (const auto& [case_id, count] : ranked) {
        if (out.size() == n_top) break;
        out.push_back(case_id);
    }
    return out;
}

CitationMatrix build_citation_matrix(const Dataset& data,
                                     const CitationMatrixOptions& options) {
    CitationMatrix cm;
    for (const auto& j : data.judges) {
        if (!data.cases_of_judge(j.judge_id).empty()) cm.judges.push_back(j.judge_id);
    }
    std::sort(cm.judges.begin(), cm.judges.end());

    // per-judge window and reference year
    std::vector<std::vector<std::size_t>> windows(cm.judges.size());
    std::vector<int> ref_years(cm.judges.size());
    cm.window_meta.resize(cm.judges.size());
    for (std::size_t r = 0; r < cm.judges.size(); ++r) {
        windows[r] = early_career_window(data, cm.judges[r], options.fraction);
        const int end_year = data.cases[windows[r].back()].decision_date.year();
        cm.window_meta[r].window_cases = windows[r].size();
        cm.window_meta[r].window_end_year = end_year;
        ref_years[r] = end_year - 1;  // rank with strictly earlier opinions
    }

    // reference set per judge (or one shared set ranked at the latest year)
    std::vector<std::vector<std::string>> ref_sets(cm.judges.size());
    if (options.global_reference_set) {
        const int latest = *std::max_element(ref_years.begin(), ref_years.end());
        std::vector<std::string> shared;
        try {
            shared = top_cited(data, latest, options.n_top);
        } catch (const std::invalid_argument&) {
        }
        for (auto& rs : ref_sets) rs = shared;
    } else {
        for (std::size_t r = 0; r < cm.judges.size(); ++r) {
            try {
                ref_sets[r] = top_cited(data, ref_years[r], options.n_top);
            } catch (const std::invalid_argument&) {
                // nothing citable that early; the row stays all-zero
            }
        }
    }

    std::unordered_set<std::string> column_set;
    for (const auto& rs : ref_sets) column_set.insert(rs.begin(), rs.end());
    cm.reference_cases.assign(column_set.begin(), column_set.end());
    std::sort(cm.reference_cases.begin(), cm.reference_cases.end());
    std::unordered_map<std::string, std::size_t> column_of;
    for (std::size_t c = 0; c < cm.reference_cases.size(); ++c)
        column_of[cm.reference_cases[c]] = c;

    cm.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cm.judges.size()),
                                      static_cast<Eigen::Index>(cm.reference_cases.size()));
    for (std::size_t r = 0; r < cm.judges.size(); ++r) {
        const std::unordered_set<std::string> in_set(ref_sets[r].begin(), ref_sets[r].end());
        double total = 0.0;
        for (std::size_t idx : windows[r]) {
            for (const auto& cited : data.cases[idx].citations) {
                if (!in_set.count(cited)) continue;
                if (options.exclude_self_citations) {
                    const CaseRecord* target = data.find_case(cited);
                    if (target && target->judge_id == cm.judges[r]) continue;
                }
                cm.values(static_cast<Eigen::Index>(r),
                          static_cast<Eigen::Index>(column_of.at(cited))) += 1.0;
                total += 1.0;
            }
        }
        if (total > 0.0)
            cm.values.row(static_cast<Eigen::Index>(r)) /= total;
        else
            cm.window_meta[r].all_zero = true;
    }
    return cm;
}

std::size_t CitationMatrix::row_of(const std::string& judge_id) const {
    const auto it = std::lower_bound(judges.begin(), judges.end(), judge_id);
    if (it == judges.end() || *it != judge_id)
        throw std::invalid_argument("citation matrix has no row for judge '" + judge_id + "'");
    return static_cast<std::size_t>(it - judges.begin());
}

void CitationMatrix::save(const std::filesystem::path& directory) const {
    std::filesystem::create_directories(directory);
    std::string triplets = "judge_id,case_id,value\n";
    for (std::size_t r = 0; r < judges.size(); ++r) {
        for (std::size_t c = 0; c < reference_cases.size(); ++c) {
            const double v = values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            if (v != 0.0)
                triplets += judges[r] + ',' + reference_cases[c] + ',' + format_double(v) + '\n';
        }
    }
    write_file_atomic(directory / "citation_matrix.csv", triplets);

    std::string rows = "judge_id,window_cases,window_end_year,all_zero\n";
    for (std::size_t r = 0; r < judges.size(); ++r) {
        rows += judges[r] + ',' + std::to_string(window_meta[r].window_cases) + ',' +
                std::to_string(window_meta[r].window_end_year) + ',' +
                std::to_string(static_cast<int>(window_meta[r].all_zero)) + '\n';
    }
    write_file_atomic(directory / "citation_judges.csv", rows);

    std::string columns = "case_id\n";
    for (const auto& id : reference_cases) columns += id + '\n';
    write_file_atomic(directory / "citation_columns.csv", columns);
}

CitationMatrix CitationMatrix::load(const std::filesystem::path& directory) {
    CitationMatrix cm;
    auto lines_of = [](const std::filesystem::path& path, const std::string& header) {
        std::istringstream in(read_file(path));
        std::string line;
        if (!std::getline(in, line) || line != header)
            throw std::runtime_error("unexpected header in " + path.string());
        std::vector<std::string> lines;
        while (std::getline(in, line))
            if (!line.empty()) lines.push_back(line);
        return lines;
    };

    for (const auto& line : lines_of(directory / "citation_judges.csv",
                                     "judge_id,window_cases,window_end_year,all_zero")) {
        std::istringstream row(line);
        std::string judge_id, cases_s, year_s, zero_s;
        std::getline(row, judge_id, ',');
        std::getline(row, cases_s, ',');
        std::getline(row, year_s, ',');
        std::getline(row, zero_s, ',');
        cm.judges.push_back(judge_id);
        cm.window_meta.push_back({std::stoul(cases_s), std::stoi(year_s), zero_s == "1"});
    }
    for (const auto& line : lines_of(directory / "citation_columns.csv", "case_id"))
        cm.reference_cases.push_back(line);

    std::unordered_map<std::string, std::size_t> row_index, column_index;
    for (std::size_t r = 0; r < cm.judges.size(); ++r) row_index[cm.judges[r]] = r;
    for (std::size_t c = 0; c < cm.reference_cases.size(); ++c)
        column_index[cm.reference_cases[c]] = c;

    cm.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cm.judges.size()),
                                      static_cast<Eigen::Index>(cm.reference_cases.size()));
    for (const auto& line :
         lines_of(directory / "citation_matrix.csv", "judge_id,case_id,value")) {
        std::istringstream row(line);
        std::string judge_id, case_id, value_s;
        std::getline(row, judge_id, ',');
        std::getline(row, case_id, ',');
        std::getline(row, value_s, ',');
        cm.values(static_cast<Eigen::Index>(row_index.at(judge_id)),
                  static_cast<Eigen::Index>(column_index.at(case_id))) = std::stod(value_s);
    }
    return cm;
}

}  // namespace courtaudit
