#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "courtaudit/types.hpp"

namespace courtaudit {

// Indices (into Dataset::cases) of the first ceil(fraction * total) cases of
// the judge's career, in decision order. Always at least one case.
std::vector<std::size_t> early_career_window(const Dataset& data, const std::string& judge_id,
                                             double fraction = 0.10);

// case_ids ranked by citations received from opinions decided in or before
// as_of_year, most cited first, ties broken by case_id; truncated to n_top.
// Throws when no opinion up to that year cites anything.
std::vector<std::string> top_cited(const Dataset& data, int as_of_year,
                                   std::size_t n_top = 500);

struct CitationMatrixOptions {
    double fraction = 0.10;
    std::size_t n_top = 500;
    bool exclude_self_citations = false;
    // One shared reference set (ranked as of the latest per-judge reference
    // year) instead of per-judge top lists.
    bool global_reference_set = false;
};

struct CitationWindowMeta {
    std::size_t window_cases = 0;
    int window_end_year = 0;
    bool all_zero = false;  // judge cited nothing inside the reference set
};

// Row-normalized early-career citation profiles: rows are judges, columns
// the union of the per-judge reference sets, entry = share of the judge's
// in-set window citations going to that case.
struct CitationMatrix {
    std::vector<std::string> judges;           // row order
    std::vector<std::string> reference_cases;  // column order, sorted, unique
    Eigen::MatrixXd values;                    // judges.size() x reference_cases.size()
    std::vector<CitationWindowMeta> window_meta;

    std::size_t row_of(const std::string& judge_id) const;  // throws if absent

    // Triplet CSV of the nonzero entries plus row/column index files.
    void save(const std::filesystem::path& directory) const;
    static CitationMatrix load(const std::filesystem::path& directory);
};

CitationMatrix build_citation_matrix(const Dataset& data,
                                     const CitationMatrixOptions& options = {});

}  // namespace courtaudit
