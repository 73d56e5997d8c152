#include "courtaudit/synthetic.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>

#include "courtaudit/assignment_audit.hpp"
#include "courtaudit/deviation_audit.hpp"
#include "courtaudit/rng.hpp"
#include "courtaudit/text_io.hpp"

namespace courtaudit {

namespace {

std::string padded(const std::string& prefix, int value, int width) {
    std::string digits = std::to_string(value);
    if (static_cast<int>(digits.size()) < width)
        digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    return prefix + digits;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

void validate(const CourtConfig& c) {
    if (c.n_judges < 1) throw std::invalid_argument("need at least one judge");
    if (c.n_cases < 1) throw std::invalid_argument("need at least one case");
    if (c.n_case_types < 1 || c.n_case_types > kNumCaseTypes)
        throw std::invalid_argument("n_case_types outside the enum range");
    if (c.n_circuits < 1 || c.n_circuits > kNumCircuitValues)
        throw std::invalid_argument("n_circuits outside the enum range");
    if (c.n_years < 1) throw std::invalid_argument("n_years must be positive");
    if (!(c.base_win_rate > 0.0 && c.base_win_rate < 1.0))
        throw std::invalid_argument("base_win_rate must lie strictly inside (0, 1)");
    if (!(c.bias_fraction >= 0.0 && c.bias_fraction <= 1.0))
        throw std::invalid_argument("bias_fraction must lie in [0, 1]");
    if (!c.judge_bias.empty() &&
        c.judge_bias.size() != static_cast<std::size_t>(c.n_judges))
        throw std::invalid_argument("judge_bias must list one value per judge");
    if (!c.circuit_offsets.empty() &&
        c.circuit_offsets.size() != static_cast<std::size_t>(c.n_circuits))
        throw std::invalid_argument("circuit_offsets must list one value per circuit");
    if (c.assignment_strength < 0.0)
        throw std::invalid_argument("assignment_strength must be non-negative");
    if (c.k_pools < 1) throw std::invalid_argument("k_pools must be positive");
    if (c.n_precedents < c.k_pools)
        throw std::invalid_argument("need at least k_pools precedents");
    if (c.citations_per_case < 1)
        throw std::invalid_argument("citations_per_case must be positive");
    if (!(c.ideology_bias_link >= 0.0 && c.ideology_bias_link <= 1.0))
        throw std::invalid_argument("ideology_bias_link must lie in [0, 1]");
}

int decade_cells(const CourtConfig& c) {
    const int first = c.start_year / 10 * 10;
    const int last = (c.start_year + c.n_years - 1) / 10 * 10;
    return (last - first) / 10 + 1;
}

}  // namespace

std::string to_string(AssignmentMode mode) {
    switch (mode) {
        case AssignmentMode::random: return "random";
        case AssignmentMode::biased: return "biased";
    }
    throw std::invalid_argument("unknown assignment mode");
}

std::string to_string(BiasMode mode) {
    switch (mode) {
        case BiasMode::uniform_shift: return "uniform_shift";
        case BiasMode::case_type_interaction: return "case_type_interaction";
    }
    throw std::invalid_argument("unknown bias mode");
}

std::string to_string(PipelineStage stage) {
    switch (stage) {
        case PipelineStage::assignment: return "assignment";
        case PipelineStage::deviation: return "deviation";
        case PipelineStage::predictability: return "predictability";
    }
    throw std::invalid_argument("unknown pipeline stage");
}

bool GroundTruth::is_planted(const std::string& judge_id) const {
    return std::binary_search(planted.begin(), planted.end(), judge_id);
}

std::string GroundTruth::to_json() const {
    nlohmann::json j;
    j["judge_ids"] = judge_ids;
    j["judge_bias"] = judge_bias;
    j["planted"] = planted;
    j["case_type_sign"] = case_type_sign;
    j["circuit_offsets"] = circuit_offsets;
    j["date_drift"] = date_drift;
    j["base_win_rate"] = base_win_rate;
    auto matrix_json = [](const Eigen::MatrixXd& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j["ideology"] = matrix_json(ideology);
    j["pool_profiles"] = matrix_json(pool_profiles);
    return j.dump(2) + "\n";
}

void GroundTruth::write_json(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json());
}

SimulatedCourt simulate_court(const CourtConfig& config) {
    validate(config);
    Rng rng(config.seed);

    SimulatedCourt court;
    GroundTruth& truth = court.truth;
    truth.base_win_rate = config.base_win_rate;
    truth.date_drift = config.date_drift;
    truth.circuit_offsets = config.circuit_offsets;
    if (truth.circuit_offsets.empty())
        truth.circuit_offsets.assign(static_cast<std::size_t>(config.n_circuits), 0.0);
    for (int t = 0; t < config.n_case_types; ++t)
        truth.case_type_sign.push_back(t % 2 == 0 ? 1.0 : -1.0);

    // main judges with plausible biographics
    const int id_width = std::max(3, static_cast<int>(std::to_string(config.n_judges).size()));
    for (int j = 0; j < config.n_judges; ++j) {
        JudgeProfile profile;
        profile.judge_id = padded("J", j + 1, id_width);
        profile.gender_male = rng.bernoulli(0.65) ? 1 : 0;
        profile.party_republican = rng.bernoulli(0.5) ? 1 : 0;
        const int years_before = 2 + static_cast<int>(rng.uniform_int(0, 12));
        profile.appointment_date =
            Date::from_ymd(config.start_year - years_before,
                           1 + static_cast<int>(rng.uniform_int(0, 11)),
                           1 + static_cast<int>(rng.uniform_int(0, 27)));
        if (rng.bernoulli(0.15))
            profile.promotion_date = Date::from_ymd(
                config.start_year + static_cast<int>(rng.uniform_int(
                                        config.n_years / 2, config.n_years)),
                6, 15);
        truth.judge_ids.push_back(profile.judge_id);
        court.data.judges.push_back(std::move(profile));
    }

    // per-judge latent bias
    truth.judge_bias = config.judge_bias;
    if (truth.judge_bias.empty()) {
        truth.judge_bias.assign(static_cast<std::size_t>(config.n_judges), 0.0);
        const auto n_planted = static_cast<std::size_t>(
            std::llround(config.bias_fraction * config.n_judges));
        for (const std::size_t j : rng.sample_without_replacement(
                 static_cast<std::size_t>(config.n_judges), n_planted))
            truth.judge_bias[j] = config.planted_bias;
    }
    for (int j = 0; j < config.n_judges; ++j)
        if (truth.judge_bias[static_cast<std::size_t>(j)] != 0.0)
            truth.planted.push_back(truth.judge_ids[static_cast<std::size_t>(j)]);
    std::sort(truth.planted.begin(), truth.planted.end());

    // latent precedent pools and per-judge ideology mixtures
    truth.pool_profiles.resize(config.k_pools, config.n_precedents);
    const std::vector<double> pool_alpha(static_cast<std::size_t>(config.n_precedents),
                                         0.5);
    for (int p = 0; p < config.k_pools; ++p) {
        const std::vector<double> row = rng.dirichlet(pool_alpha);
        for (int c = 0; c < config.n_precedents; ++c)
            truth.pool_profiles(p, c) = row[static_cast<std::size_t>(c)];
    }
    truth.ideology.resize(config.n_judges, config.k_pools);
    const std::vector<double> ideology_alpha(static_cast<std::size_t>(config.k_pools),
                                             0.8);
    for (int j = 0; j < config.n_judges; ++j) {
        std::vector<double> mix = rng.dirichlet(ideology_alpha);
        if (truth.judge_bias[static_cast<std::size_t>(j)] != 0.0 &&
            config.ideology_bias_link > 0.0) {
            for (auto& v : mix) v *= 1.0 - config.ideology_bias_link;
            mix[0] += config.ideology_bias_link;
        }
        for (int p = 0; p < config.k_pools; ++p)
            truth.ideology(j, p) = mix[static_cast<std::size_t>(p)];
    }

    // case-type distribution per (circuit, decade) cell
    const int n_decades = decade_cells(config);
    const int first_decade = config.start_year / 10 * 10;
    std::vector<std::vector<double>> type_rates = config.case_type_rates;
    const auto n_cells =
        static_cast<std::size_t>(config.n_circuits) * static_cast<std::size_t>(n_decades);
    if (type_rates.empty()) {
        const std::vector<double> rate_alpha(
            static_cast<std::size_t>(config.n_case_types), 5.0);
        for (std::size_t cell = 0; cell < n_cells; ++cell)
            type_rates.push_back(rng.dirichlet(rate_alpha));
    } else {
        if (type_rates.size() != n_cells)
            throw std::invalid_argument(
                "case_type_rates must cover every (circuit, decade) cell");
        for (const auto& rates : type_rates) {
            if (rates.size() != static_cast<std::size_t>(config.n_case_types))
                throw std::invalid_argument(
                    "each case_type_rates entry needs one rate per type");
            double total = 0.0;
            for (const double r : rates) {
                if (r < 0.0) throw std::invalid_argument("negative case type rate");
                total += r;
            }
            if (std::abs(total - 1.0) > 1e-9)
                throw std::invalid_argument("case type rates must sum to 1");
        }
    }

    // historic judge decides the precedent universe before the window opens
    JudgeProfile historic;
    historic.judge_id = "H001";
    historic.gender_male = 1;
    historic.party_republican = rng.bernoulli(0.5) ? 1 : 0;
    historic.appointment_date = Date::from_ymd(config.start_year - 20, 1, 2);
    court.data.judges.push_back(historic);
    std::vector<std::string> precedent_ids;
    const Date precedent_start = Date::from_ymd(config.start_year - 6, 1, 1);
    for (int p = 0; p < config.n_precedents; ++p) {
        CaseRecord rec;
        rec.case_id = padded("P", p + 1, 4);
        rec.judge_id = historic.judge_id;
        rec.decision_date = precedent_start.plus_days(3 * p);
        rec.circuit = static_cast<Circuit>(p % config.n_circuits);
        rec.case_type = static_cast<CaseType>(p % config.n_case_types);
        rec.outcome = rng.bernoulli(config.base_win_rate) ? 1 : 0;
        precedent_ids.push_back(rec.case_id);
        court.data.cases.push_back(std::move(rec));
    }

    // per-judge citation distribution over precedents
    const Eigen::MatrixXd mixture = truth.ideology * truth.pool_profiles;
    std::vector<std::vector<double>> citation_weights(
        static_cast<std::size_t>(config.n_judges));
    for (int j = 0; j < config.n_judges; ++j) {
        auto& w = citation_weights[static_cast<std::size_t>(j)];
        w.resize(static_cast<std::size_t>(config.n_precedents));
        for (int c = 0; c < config.n_precedents; ++c)
            w[static_cast<std::size_t>(c)] = mixture(j, c);
    }

    // judge-type preference weights for biased assignment
    std::vector<std::vector<double>> assignment_weights;
    if (config.assignment_mode == AssignmentMode::biased) {
        assignment_weights.resize(static_cast<std::size_t>(config.n_case_types));
        for (int t = 0; t < config.n_case_types; ++t) {
            auto& w = assignment_weights[static_cast<std::size_t>(t)];
            w.resize(static_cast<std::size_t>(config.n_judges));
            for (int j = 0; j < config.n_judges; ++j)
                w[static_cast<std::size_t>(j)] =
                    std::exp(config.assignment_strength * ((j + t) % 2 == 0 ? 1.0 : -1.0));
        }
    }

    const std::int64_t window_start = Date::from_ymd(config.start_year, 1, 1).serial();
    const std::int64_t window_end =
        Date::from_ymd(config.start_year + config.n_years, 1, 1).serial() - 1;
    const double mid_year = config.start_year + config.n_years / 2.0;
    const double base_logit = logit(config.base_win_rate);
    const int case_width =
        std::max(6, static_cast<int>(std::to_string(config.n_cases).size()));

    for (int i = 0; i < config.n_cases; ++i) {
        CaseRecord rec;
        rec.case_id = padded("C", i + 1, case_width);
        rec.decision_date = Date(rng.uniform_int(window_start, window_end));
        const int circuit_idx = static_cast<int>(rng.uniform_int(0, config.n_circuits - 1));
        rec.circuit = static_cast<Circuit>(circuit_idx);
        const int decade_idx = (rec.decade() - first_decade) / 10;
        const auto cell = static_cast<std::size_t>(circuit_idx * n_decades + decade_idx);
        const int type_idx = static_cast<int>(rng.categorical(type_rates[cell]));
        rec.case_type = static_cast<CaseType>(type_idx);

        const int judge_idx =
            config.assignment_mode == AssignmentMode::biased
                ? static_cast<int>(rng.categorical(
                      assignment_weights[static_cast<std::size_t>(type_idx)]))
                : static_cast<int>(rng.uniform_int(0, config.n_judges - 1));
        rec.judge_id = truth.judge_ids[static_cast<std::size_t>(judge_idx)];

        const double bias = truth.judge_bias[static_cast<std::size_t>(judge_idx)];
        const double bias_term =
            config.bias_mode == BiasMode::uniform_shift
                ? bias
                : bias * truth.case_type_sign[static_cast<std::size_t>(type_idx)];
        const double eta =
            base_logit + bias_term +
            config.date_drift * (rec.decision_date.year_fraction() - mid_year) +
            truth.circuit_offsets[static_cast<std::size_t>(circuit_idx)];
        rec.outcome = rng.bernoulli(sigmoid(eta)) ? 1 : 0;

        for (int cite = 0; cite < config.citations_per_case; ++cite)
            rec.citations.push_back(precedent_ids[rng.categorical(
                citation_weights[static_cast<std::size_t>(judge_idx)])]);
        court.data.cases.push_back(std::move(rec));
    }

    court.data.provenance["source"] = "synthetic";
    court.data.provenance["seed"] = std::to_string(config.seed);
    court.data.build_index();
    return court;
}

std::string PowerStudy::to_csv() const {
    std::ostringstream out;
    out << "stage,label,n_replicates,n_planted,n_impartial,power,power_std_err,"
           "false_flag_rate,false_flag_std_err\n";
    for (const auto& cell : cells)
        out << to_string(stage) << ',' << cell.label << ',' << cell.n_replicates << ','
            << cell.n_planted << ',' << cell.n_impartial << ','
            << format_double(cell.power) << ',' << format_double(cell.power_std_err)
            << ',' << format_double(cell.false_flag_rate) << ','
            << format_double(cell.false_flag_std_err) << '\n';
    return out.str();
}

std::string PowerStudy::to_json() const {
    nlohmann::json j;
    j["stage"] = to_string(stage);
    j["alpha"] = alpha;
    nlohmann::json cells_json = nlohmann::json::array();
    for (const auto& cell : cells)
        cells_json.push_back({{"label", cell.label},
                              {"n_replicates", cell.n_replicates},
                              {"n_planted", cell.n_planted},
                              {"n_impartial", cell.n_impartial},
                              {"power", cell.power},
                              {"power_std_err", cell.power_std_err},
                              {"false_flag_rate", cell.false_flag_rate},
                              {"false_flag_std_err", cell.false_flag_std_err}});
    j["cells"] = std::move(cells_json);
    return j.dump(2) + "\n";
}

void PowerStudy::write_csv(const std::filesystem::path& path) const {
    write_file_atomic(path, to_csv());
}

void PowerStudy::write_json(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json());
}

PowerStudy power_study(const std::vector<PowerGridPoint>& grid, PipelineStage stage,
                       const PowerOptions& options) {
    if (grid.empty()) throw std::invalid_argument("empty power grid");
    if (options.n_replicates < 1)
        throw std::invalid_argument("need at least one replicate");
    if (!(options.alpha > 0.0 && options.alpha < 1.0) ||
        !(options.by_alpha > 0.0 && options.by_alpha < 1.0))
        throw std::invalid_argument("alpha levels must lie in (0, 1)");

    PowerStudy study;
    study.stage = stage;
    study.alpha = stage == PipelineStage::assignment ? options.by_alpha : options.alpha;
    const Rng base(options.seed);

    for (std::size_t cell_idx = 0; cell_idx < grid.size(); ++cell_idx) {
        const PowerGridPoint& point = grid[cell_idx];
        long planted_flagged = 0, planted_total = 0;
        long impartial_flagged = 0, impartial_total = 0;

        for (int rep = 0; rep < options.n_replicates; ++rep) {
            CourtConfig config = point.config;
            Rng seeder = base.child(cell_idx * 1000003ULL +
                                    static_cast<std::uint64_t>(rep));
            config.seed = seeder.next_u64();
            const SimulatedCourt court = simulate_court(config);

            if (stage == PipelineStage::assignment) {
                const AuditReport report =
                    audit_assignment(court.data, LabelKind::case_type, 10,
                                     options.by_alpha, 100);
                const bool detected =
                    report.corrected.at(Correction::benjamini_yekutieli).n_rejected > 0;
                const bool biased_court =
                    config.assignment_mode == AssignmentMode::biased &&
                    config.assignment_strength > 0.0;
                if (biased_court) {
                    ++planted_total;
                    if (detected) ++planted_flagged;
                } else {
                    ++impartial_total;
                    if (detected) ++impartial_flagged;
                }
                continue;
            }

            std::set<std::string> flagged;
            if (stage == PipelineStage::deviation) {
                const DeviationAudit audit =
                    judge_deviation_test(court.data, std::nullopt, options.alpha);
                for (const auto& entry : audit.entries)
                    if (entry.flag != DeviationFlag::within)
                        flagged.insert(entry.judge_id);
            } else {
                PredictabilityParams params = options.predictability;
                Rng param_seeder = base.child(cell_idx * 1000003ULL + 500000ULL +
                                              static_cast<std::uint64_t>(rep));
                params.seed = param_seeder.next_u64();
                try {
                    flagged = run_predictability(court.data, params).over_flagged;
                } catch (const std::runtime_error&) {
                    // no qualifying judge or no usable case type: nothing flagged
                }
            }
            for (const auto& judge_id : court.truth.judge_ids) {
                const bool hit = flagged.count(judge_id) > 0;
                if (court.truth.is_planted(judge_id)) {
                    ++planted_total;
                    if (hit) ++planted_flagged;
                } else {
                    ++impartial_total;
                    if (hit) ++impartial_flagged;
                }
            }
        }

        PowerCell cell;
        cell.label = point.label;
        cell.n_replicates = options.n_replicates;
        cell.n_planted = static_cast<int>(planted_total);
        cell.n_impartial = static_cast<int>(impartial_total);
        const auto rate = [](long hits, long total) {
            return total > 0 ? static_cast<double>(hits) / static_cast<double>(total)
                             : 0.0;
        };
        const auto std_err = [&](double p, long total) {
            return total > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(total))
                             : 0.0;
        };
        cell.power = rate(planted_flagged, planted_total);
        cell.power_std_err = std_err(cell.power, planted_total);
        cell.false_flag_rate = rate(impartial_flagged, impartial_total);
        cell.false_flag_std_err = std_err(cell.false_flag_rate, impartial_total);
        study.cells.push_back(std::move(cell));
    }
    return study;
}

}  // namespace courtaudit
