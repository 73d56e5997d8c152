#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "courtaudit/types.hpp"

namespace courtaudit {

enum class FileFormat { csv, json_lines };

FileFormat file_format_from_string(const std::string& s);
std::string to_string(FileFormat f);

struct LoadIssue {
    std::size_t line = 0;        // 1-based line in the source file (0 = file level)
    std::string field;           // offending column/key, if any
    std::string message;
};

struct LoadReport {
    std::size_t case_rows_read = 0;
    std::size_t judge_rows_read = 0;
    std::vector<LoadIssue> issues;

    bool ok() const { return issues.empty(); }
    std::string to_json() const;
};

struct LoadedDataset {
    Dataset data;
    LoadReport report;
};

// Loads and cross-validates case and judge files. File-level problems
// (missing file, bad header) throw; row-level problems (malformed field,
// out-of-domain value, duplicate case_id, unresolvable judge_id,
// decision before appointment) drop the row and land in the report.
// The returned Dataset is indexed and satisfies all referential invariants.
LoadedDataset load_dataset(const std::filesystem::path& cases_path,
                           const std::filesystem::path& judges_path, FileFormat format);

// Canonical serialization; loading then saving a canonical file reproduces
// it byte for byte.
void save_cases_csv(const Dataset& data, const std::filesystem::path& path);
void save_judges_csv(const Dataset& data, const std::filesystem::path& path);
void save_cases_jsonl(const Dataset& data, const std::filesystem::path& path);
void save_judges_jsonl(const Dataset& data, const std::filesystem::path& path);

}  // namespace courtaudit
