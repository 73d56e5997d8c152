#include "courtaudit/dataset_io.hpp"

#include <ctime>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace courtaudit {

using nlohmann::json;

namespace {

const std::vector<std::string> kCaseColumns = {
    "case_id", "judge_id", "decision_date", "circuit", "case_type",
    "outcome", "entity_label", "citations"};
const std::vector<std::string> kJudgeColumns = {
    "judge_id", "gender_male", "party_republican", "appointment_date", "promotion_date"};

const Date kMinDecisionDate = Date::from_ymd(1880, 1, 1);

Date today() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    return Date::from_ymd(utc.tm_year + 1900, utc.tm_mon + 1, utc.tm_mday);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

struct RowReader {
    std::ifstream stream;
    std::size_t line_no = 0;
    explicit RowReader(const std::filesystem::path& path) : stream(path) {
        if (!stream) throw std::runtime_error("cannot open file: " + path.string());
    }
    bool next(std::string& line) {
        while (std::getline(stream, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    }
};

void check_csv_header(const std::string& line, const std::vector<std::string>& expected,
                      const std::filesystem::path& path) {
    if (split(line, ',') != expected) {
        std::string want;
        for (const auto& c : expected) want += (want.empty() ? "" : ",") + c;
        throw std::runtime_error("schema mismatch in " + path.string() + ": header must be '" +
                                 want + "'");
    }
}

int parse_binary(const std::string& text, const char* field) {
    if (text == "0") return 0;
    if (text == "1") return 1;
    throw std::invalid_argument(std::string(field) + " must be 0 or 1, got '" + text + "'");
}

// One parsed-but-unvalidated row; validation against the other file happens
// after both files are read.
struct RawCase {
    CaseRecord record;
    std::size_t line;
};
struct RawJudge {
    JudgeProfile profile;
    std::size_t line;
};

CaseRecord case_from_fields(const std::vector<std::string>& fields) {
    CaseRecord c;
    c.case_id = fields[0];
    c.judge_id = fields[1];
    if (c.case_id.empty()) throw std::invalid_argument("case_id is empty");
    if (c.judge_id.empty()) throw std::invalid_argument("judge_id is empty");
    c.decision_date = Date::parse_iso(fields[2]);
    c.circuit = circuit_from_string(fields[3]);
    c.case_type = case_type_from_string(fields[4]);
    c.outcome = parse_binary(fields[5], "outcome");
    if (!fields[6].empty()) c.entity_label = entity_label_from_string(fields[6]);
    if (!fields[7].empty()) c.citations = split(fields[7], ';');
    return c;
}

CaseRecord case_from_json(const json& row) {
    for (const auto& key : kCaseColumns) {
        if (key != "entity_label" && !row.contains(key))
            throw std::invalid_argument("missing key '" + key + "'");
    }
    CaseRecord c;
    c.case_id = row.at("case_id").get<std::string>();
    c.judge_id = row.at("judge_id").get<std::string>();
    if (c.case_id.empty()) throw std::invalid_argument("case_id is empty");
    if (c.judge_id.empty()) throw std::invalid_argument("judge_id is empty");
    c.decision_date = Date::parse_iso(row.at("decision_date").get<std::string>());
    c.circuit = circuit_from_string(row.at("circuit").get<std::string>());
    c.case_type = case_type_from_string(row.at("case_type").get<std::string>());
    if (!row.at("outcome").is_number_integer())
        throw std::invalid_argument("outcome must be an integer");
    const int outcome = row.at("outcome").get<int>();
    if (outcome != 0 && outcome != 1)
        throw std::invalid_argument("outcome must be 0 or 1, got " + std::to_string(outcome));
    c.outcome = outcome;
    if (row.contains("entity_label") && !row.at("entity_label").is_null()) {
        const auto label = row.at("entity_label").get<std::string>();
        if (!label.empty()) c.entity_label = entity_label_from_string(label);
    }
    c.citations = row.at("citations").get<std::vector<std::string>>();
    return c;
}

JudgeProfile judge_from_fields(const std::vector<std::string>& fields) {
    JudgeProfile j;
    j.judge_id = fields[0];
    if (j.judge_id.empty()) throw std::invalid_argument("judge_id is empty");
    j.gender_male = parse_binary(fields[1], "gender_male");
    j.party_republican = parse_binary(fields[2], "party_republican");
    j.appointment_date = Date::parse_iso(fields[3]);
    if (!fields[4].empty()) j.promotion_date = Date::parse_iso(fields[4]);
    return j;
}

JudgeProfile judge_from_json(const json& row) {
    for (const auto& key : kJudgeColumns) {
        if (key != "promotion_date" && !row.contains(key))
            throw std::invalid_argument("missing key '" + key + "'");
    }
    JudgeProfile j;
    j.judge_id = row.at("judge_id").get<std::string>();
    if (j.judge_id.empty()) throw std::invalid_argument("judge_id is empty");
    auto binary_of = [&row](const char* key) {
        if (!row.at(key).is_number_integer())
            throw std::invalid_argument(std::string(key) + " must be an integer");
        const int v = row.at(key).get<int>();
        if (v != 0 && v != 1)
            throw std::invalid_argument(std::string(key) + " must be 0 or 1, got " +
                                        std::to_string(v));
        return v;
    };
    j.gender_male = binary_of("gender_male");
    j.party_republican = binary_of("party_republican");
    j.appointment_date = Date::parse_iso(row.at("appointment_date").get<std::string>());
    if (row.contains("promotion_date") && !row.at("promotion_date").is_null()) {
        const auto text = row.at("promotion_date").get<std::string>();
        if (!text.empty()) j.promotion_date = Date::parse_iso(text);
    }
    return j;
}

template <typename Raw, typename FromFields, typename FromJson>
std::vector<Raw> read_rows(const std::filesystem::path& path, FileFormat format,
                           const std::vector<std::string>& columns, std::size_t n_fields,
                           FromFields from_fields, FromJson from_json, std::size_t& rows_read,
                           std::vector<LoadIssue>& issues) {
    std::vector<Raw> rows;
    RowReader reader(path);
    std::string line;
    if (format == FileFormat::csv) {
        if (!reader.next(line)) throw std::runtime_error("empty file: " + path.string());
        check_csv_header(line, columns, path);
    }
    while (reader.next(line)) {
        ++rows_read;
        try {
            if (format == FileFormat::csv) {
                const auto fields = split(line, ',');
                if (fields.size() != n_fields)
                    throw std::invalid_argument("expected " + std::to_string(n_fields) +
                                                " fields, got " + std::to_string(fields.size()));
                rows.push_back({from_fields(fields), reader.line_no});
            } else {
                rows.push_back({from_json(json::parse(line)), reader.line_no});
            }
        } catch (const json::exception& e) {
            issues.push_back({reader.line_no, "", std::string("invalid JSON: ") + e.what()});
        } catch (const std::exception& e) {
            issues.push_back({reader.line_no, "", e.what()});
        }
    }
    return rows;
}

std::string join_citations(const std::vector<std::string>& citations) {
    std::string out;
    for (std::size_t i = 0; i < citations.size(); ++i) {
        if (i) out += ';';
        out += citations[i];
    }
    return out;
}

}  // namespace

FileFormat file_format_from_string(const std::string& s) {
    if (s == "csv") return FileFormat::csv;
    if (s == "json-lines" || s == "jsonl") return FileFormat::json_lines;
    throw std::invalid_argument("unknown file format: '" + s + "'");
}

std::string to_string(FileFormat f) {
    return f == FileFormat::csv ? "csv" : "json-lines";
}

std::string LoadReport::to_json() const {
    json j;
    j["case_rows_read"] = case_rows_read;
    j["judge_rows_read"] = judge_rows_read;
    j["n_issues"] = issues.size();
    j["issues"] = json::array();
    for (const auto& issue : issues) {
        j["issues"].push_back(
            {{"line", issue.line}, {"field", issue.field}, {"message", issue.message}});
    }
    return j.dump(2);
}

LoadedDataset load_dataset(const std::filesystem::path& cases_path,
                           const std::filesystem::path& judges_path, FileFormat format) {
    LoadedDataset out;
    auto& issues = out.report.issues;

    auto raw_judges = read_rows<RawJudge>(judges_path, format, kJudgeColumns, 5,
                                          judge_from_fields, judge_from_json,
                                          out.report.judge_rows_read, issues);
    auto raw_cases = read_rows<RawCase>(cases_path, format, kCaseColumns, 8,
                                        case_from_fields, case_from_json,
                                        out.report.case_rows_read, issues);

    std::unordered_set<std::string> judge_ids;
    for (const auto& raw : raw_judges) {
        if (!judge_ids.insert(raw.profile.judge_id).second) {
            issues.push_back({raw.line, "judge_id",
                              "duplicate judge_id '" + raw.profile.judge_id + "'"});
            continue;
        }
        out.data.judges.push_back(raw.profile);
    }

    std::unordered_map<std::string, const JudgeProfile*> judge_by_id;
    for (const auto& j : out.data.judges) judge_by_id[j.judge_id] = &j;

    const Date max_date = today();
    std::unordered_set<std::string> case_ids;
    for (const auto& raw : raw_cases) {
        const auto& c = raw.record;
        if (!case_ids.insert(c.case_id).second) {
            issues.push_back({raw.line, "case_id", "duplicate case_id '" + c.case_id + "'"});
            continue;
        }
        if (c.decision_date < kMinDecisionDate || c.decision_date > max_date) {
            issues.push_back({raw.line, "decision_date",
                              "decision_date " + c.decision_date.to_iso() +
                                  " outside [1880-01-01, today]"});
            continue;
        }
        auto judge_it = judge_by_id.find(c.judge_id);
        if (judge_it == judge_by_id.end()) {
            issues.push_back({raw.line, "judge_id",
                              "case '" + c.case_id + "' references unknown judge_id '" +
                                  c.judge_id + "'"});
            continue;
        }
        if (c.decision_date < judge_it->second->appointment_date) {
            issues.push_back({raw.line, "decision_date",
                              "case '" + c.case_id + "' decided before judge '" + c.judge_id +
                                  "' was appointed"});
            continue;
        }
        out.data.cases.push_back(c);
    }

    out.data.provenance["cases_path"] = cases_path.string();
    out.data.provenance["judges_path"] = judges_path.string();
    out.data.provenance["format"] = to_string(format);
    out.data.build_index();
    return out;
}

void save_cases_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << "case_id,judge_id,decision_date,circuit,case_type,outcome,entity_label,citations\n";
    for (const auto& c : data.cases) {
        out << c.case_id << ',' << c.judge_id << ',' << c.decision_date.to_iso() << ','
            << to_string(c.circuit) << ',' << to_string(c.case_type) << ',' << c.outcome << ','
            << (c.entity_label ? to_string(*c.entity_label) : "") << ','
            << join_citations(c.citations) << '\n';
    }
}

void save_judges_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << "judge_id,gender_male,party_republican,appointment_date,promotion_date\n";
    for (const auto& j : data.judges) {
        out << j.judge_id << ',' << j.gender_male << ',' << j.party_republican << ','
            << j.appointment_date.to_iso() << ','
            << (j.promotion_date ? j.promotion_date->to_iso() : "") << '\n';
    }
}

void save_cases_jsonl(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    for (const auto& c : data.cases) {
        json row;
        row["case_id"] = c.case_id;
        row["judge_id"] = c.judge_id;
        row["decision_date"] = c.decision_date.to_iso();
        row["circuit"] = to_string(c.circuit);
        row["case_type"] = to_string(c.case_type);
        row["outcome"] = c.outcome;
        if (c.entity_label)
            row["entity_label"] = to_string(*c.entity_label);
        else
            row["entity_label"] = nullptr;
        row["citations"] = c.citations;
        out << row.dump() << '\n';
    }
}

void save_judges_jsonl(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    for (const auto& j : data.judges) {
        json row;
        row["judge_id"] = j.judge_id;
        row["gender_male"] = j.gender_male;
        row["party_republican"] = j.party_republican;
        row["appointment_date"] = j.appointment_date.to_iso();
        if (j.promotion_date)
            row["promotion_date"] = j.promotion_date->to_iso();
        else
            row["promotion_date"] = nullptr;
        out << row.dump() << '\n';
    }
}

}  // namespace courtaudit
