#include "run_config.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "courtaudit/text_io.hpp"

namespace courtaudit::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
    throw std::invalid_argument("config key '" + key + "': cannot read '" + value +
                                "' as " + expected);
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> parts;
    std::string current;
    std::istringstream in(text);
    while (std::getline(in, current, ',')) parts.push_back(trim(current));
    return parts;
}

}  // namespace

const std::vector<RunConfig::Spec>& RunConfig::specs() {
    static const std::vector<Spec> kSpecs = {
        {"io.cases", "", "case records file (csv or json-lines)"},
        {"io.judges", "", "judge profiles file (csv or json-lines)"},
        {"io.format", "csv", "input format: csv or json-lines"},
        {"io.output", "", "output directory holding artifacts and manifests"},

        {"assignment.label", "case_type",
         "label audited for assignment balance: case_type or entity_label"},
        {"assignment.min_judgments", "10",
         "smallest per-judge case count tested within a context"},
        {"assignment.min_context_cases", "100",
         "smallest circuit-decade cell granted a base rate"},
        {"assignment.alpha", "0.05", "significance level for the corrected audits"},

        {"deviation.p0", "pooled",
         "null win rate: 'pooled' or a number in (0, 1)"},
        {"deviation.alpha", "0.10", "two-sided significance level per judge"},
        {"deviation.bins", "30", "histogram bins for the win-rate summary"},

        {"embed.fraction", "0.1", "early-career window share of each career"},
        {"embed.n_top", "500", "reference set size of most-cited precedents"},
        {"embed.exclude_self_citations", "false",
         "drop citations to the judge's own opinions"},
        {"embed.global_reference_set", "false",
         "rank one shared reference set instead of per-judge lists"},
        {"embed.k", "30", "embedding dimension of the factorization"},
        {"embed.l1_w", "0", "L1 penalty on the judge factors"},
        {"embed.l2_w", "0", "L2 penalty on the judge factors"},
        {"embed.l1_h", "0", "L1 penalty on the case factors"},
        {"embed.l2_h", "0", "L2 penalty on the case factors"},
        {"embed.tol", "1e-6", "relative objective decrease that stops the solver"},
        {"embed.max_iter", "500", "update sweeps per start"},
        {"embed.restarts", "5", "seeded starts; the lowest objective wins"},
        {"embed.seed", "0", "base seed of the factorization starts"},

        {"train.ratio", "0.75", "train share of the guarded per-type split"},
        {"train.balance", "true", "downsample training to equal win/loss counts"},
        {"train.use_cv", "false", "grid-search instead of the fixed configuration"},
        {"train.n_estimators", "100", "trees in the fixed configuration"},
        {"train.max_depth", "4", "tree depth in the fixed configuration"},
        {"train.learning_rate", "0.1", "shrinkage in the fixed configuration"},
        {"train.cv_folds", "3", "cross-validation folds"},
        {"train.n_estimators_grid", "25,50,100", "tree-count grid"},
        {"train.max_depth_grid", "2,4,5", "depth grid"},
        {"train.learning_rate_grid", "0.01,0.1,0.2", "shrinkage grid"},
        {"train.min_leaf", "20", "smallest row count allowed in a leaf"},
        {"train.max_bins", "32", "quantile split candidates per feature"},
        {"train.min_rows_per_type", "50", "skip case types with fewer usable rows"},
        {"train.seed", "0", "seed of splits, balancing and the grid search"},

        {"evaluate.bootstrap", "100", "bootstrap resamples per confidence bin"},
        {"evaluate.seed", "0", "seed of the evaluation balancing and bootstrap"},

        {"judge-test.min_cases", "50",
         "smallest balanced per-judge case count that qualifies"},
        {"judge-test.kappa", "0.025",
         "half-width of the indifferent prediction band around 0.5"},
        {"judge-test.alpha", "0.10", "level of the per-judge interval and BH pass"},
        {"judge-test.repetitions", "30", "balanced downsampling repetitions"},
        {"judge-test.seed", "0", "seed of the repetition draws"},

        {"explain.l2", "0.001", "ridge penalty of the attribute regressions"},
        {"explain.shapley", "sampling", "attribution method: exact or sampling"},
        {"explain.samples", "200", "permutations per explained case (sampling)"},
        {"explain.background_rows", "100", "training rows behind the baseline"},
        {"explain.rows", "25", "test cases explained"},
        {"explain.seed", "0", "seed of the background and case draws"},

        {"simulate.judges", "40", "judges on the simulated bench"},
        {"simulate.cases", "8000", "cases on the main docket"},
        {"simulate.case_types", "4", "case types in play (from the enum)"},
        {"simulate.circuits", "3", "circuits in play (from the enum)"},
        {"simulate.start_year", "1980", "first year of the docket window"},
        {"simulate.years", "20", "length of the docket window in years"},
        {"simulate.assignment", "random", "assignment mode: random or biased"},
        {"simulate.assignment_strength", "0",
         "log-odds scale of the seeded judge-type preference"},
        {"simulate.base_win_rate", "0.25", "impartial plaintiff win rate"},
        {"simulate.bias_mode", "uniform_shift",
         "bias mechanism: uniform_shift or case_type_interaction"},
        {"simulate.bias_fraction", "0", "share of judges given the planted bias"},
        {"simulate.planted_bias", "0", "log-odds bias of the planted judges"},
        {"simulate.date_drift", "0", "log-odds drift per year, centered"},
        {"simulate.k_pools", "3", "latent precedent pools"},
        {"simulate.n_precedents", "60", "citable precedent universe"},
        {"simulate.citations_per_case", "6", "citations drawn per opinion"},
        {"simulate.ideology_link", "0",
         "how hard planted judges lean on the first pool (0..1)"},
        {"simulate.seed", "0", "seed of the whole court draw"},

        {"power.stage", "deviation",
         "scored stage: assignment, deviation or predictability"},
        {"power.replicates", "50", "simulated courts per grid point"},
        {"power.alpha", "0.10", "per-judge flag level of the scored stage"},
        {"power.by_alpha", "0.05", "Benjamini-Yekutieli level (assignment stage)"},
        {"power.sweep", "planted_bias", "simulate.* field swept across the grid"},
        {"power.values", "0,0.75,1.5", "sweep values, comma separated"},
        {"power.seed", "0", "seed of the replicate draws"},
    };
    return kSpecs;
}

const std::map<std::string, std::string>& RunConfig::defaults() {
    static const std::map<std::string, std::string> kDefaults = [] {
        std::map<std::string, std::string> out;
        for (const Spec& spec : specs()) out.emplace(spec.key, spec.fallback);
        return out;
    }();
    return kDefaults;
}

std::map<std::string, std::string> parse_ini(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']' || stripped.size() < 3)
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": malformed section header");
            section = trim(stripped.substr(1, stripped.size() - 2));
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        out[full] = trim(stripped.substr(eq + 1));
    }
    return out;
}

RunConfig RunConfig::resolve(const std::filesystem::path& config_file,
                             const std::map<std::string, std::string>& flag_overrides) {
    RunConfig cfg;
    cfg.values = defaults();
    const auto apply = [&cfg](const std::map<std::string, std::string>& layer,
                              const char* origin) {
        for (const auto& [key, value] : layer) {
            const auto it = cfg.values.find(key);
            if (it == cfg.values.end())
                throw std::invalid_argument(std::string(origin) +
                                            " sets unknown key '" + key + "'");
            it->second = value;
        }
    };
    if (!config_file.empty()) apply(parse_ini(read_file(config_file)), "config file");
    apply(flag_overrides, "flag");
    return cfg;
}

bool RunConfig::has(const std::string& key) const { return values.count(key) > 0; }

std::string RunConfig::text(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end())
        throw std::invalid_argument("unknown config key '" + key + "'");
    return it->second;
}

int RunConfig::integer(const std::string& key) const {
    const std::string v = text(key);
    try {
        std::size_t used = 0;
        const int out = std::stoi(v, &used);
        if (used != v.size()) bad_value(key, v, "an integer");
        return out;
    } catch (const std::invalid_argument&) {
        bad_value(key, v, "an integer");
    } catch (const std::out_of_range&) {
        bad_value(key, v, "an integer");
    }
}

double RunConfig::real(const std::string& key) const {
    const std::string v = text(key);
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) bad_value(key, v, "a number");
        return out;
    } catch (const std::invalid_argument&) {
        bad_value(key, v, "a number");
    } catch (const std::out_of_range&) {
        bad_value(key, v, "a number");
    }
}

bool RunConfig::flag(const std::string& key) const {
    std::string v = text(key);
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, text(key), "a boolean");
}

std::uint64_t RunConfig::seed(const std::string& key) const {
    const std::string v = text(key);
    try {
        std::size_t used = 0;
        const std::uint64_t out = std::stoull(v, &used);
        if (used != v.size()) bad_value(key, v, "a seed");
        return out;
    } catch (const std::invalid_argument&) {
        bad_value(key, v, "a seed");
    } catch (const std::out_of_range&) {
        bad_value(key, v, "a seed");
    }
}

std::vector<int> RunConfig::int_list(const std::string& key) const {
    std::vector<int> out;
    for (const std::string& part : split_commas(text(key))) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(part, &used));
            if (used != part.size()) bad_value(key, part, "an integer list");
        } catch (const std::exception&) {
            bad_value(key, part, "an integer list");
        }
    }
    if (out.empty()) bad_value(key, text(key), "a non-empty integer list");
    return out;
}

std::vector<double> RunConfig::real_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& part : split_commas(text(key))) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(part, &used));
            if (used != part.size()) bad_value(key, part, "a number list");
        } catch (const std::exception&) {
            bad_value(key, part, "a number list");
        }
    }
    if (out.empty()) bad_value(key, text(key), "a non-empty number list");
    return out;
}

std::map<std::string, std::string> RunConfig::section(
    const std::vector<std::string>& prefixes) const {
    std::map<std::string, std::string> out;
    for (const auto& [key, value] : values)
        for (const std::string& prefix : prefixes)
            if (key.rfind(prefix + ".", 0) == 0) out.emplace(key, value);
    return out;
}

std::string RunConfig::to_ini() const {
    std::ostringstream out;
    std::string current;
    for (const auto& [key, value] : values) {  // std::map: already sorted
        const std::size_t dot = key.find('.');
        const std::string section = key.substr(0, dot);
        if (section != current) {
            if (!current.empty()) out << '\n';
            out << '[' << section << "]\n";
            current = section;
        }
        out << key.substr(dot + 1) << " = " << value << '\n';
    }
    return out.str();
}

}  // namespace courtaudit::cli
