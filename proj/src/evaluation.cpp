#include "courtaudit/evaluation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "courtaudit/binomial.hpp"
#include "courtaudit/corrections.hpp"
#include "courtaudit/predictors.hpp"
#include "courtaudit/rng.hpp"
#include "courtaudit/text_io.hpp"

namespace courtaudit {

namespace {

constexpr std::array<double, 6> kBinEdges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

std::size_t bin_of(double p) {
    // [0,0.2), [0.2,0.4), [0.4,0.6), [0.6,0.8), [0.8,1.0]; comparisons against
    // the stored edges, not division, so boundary values land in the upper bin
    for (std::size_t b = 4; b > 0; --b)
        if (p >= kBinEdges[b]) return b;
    return 0;
}

bool correct_prediction(const CasePrediction& c) {
    return (c.probability > 0.5) == (c.label == 1);
}

void validate_predictions(const std::vector<CasePrediction>& per_case) {
    if (per_case.empty()) throw std::invalid_argument("no predictions supplied");
    for (const auto& c : per_case) {
        if (!(c.probability >= 0.0 && c.probability <= 1.0))
            throw std::invalid_argument("probability outside [0, 1] for case " + c.case_id);
        if (c.label != 0 && c.label != 1)
            throw std::invalid_argument("label must be 0 or 1 for case " + c.case_id);
    }
}

double sample_std(const std::vector<double>& values, double mean) {
    if (values.size() < 2) return 0.0;
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

PredictionEval bin_accuracy(std::vector<CasePrediction> per_case, int n_bootstrap,
                            std::uint64_t seed) {
    validate_predictions(per_case);
    if (n_bootstrap < 0) throw std::invalid_argument("bootstrap count must be non-negative");

    PredictionEval eval;
    eval.n_bootstrap = n_bootstrap;
    for (std::size_t b = 0; b < 5; ++b) {
        eval.bins[b].lo = kBinEdges[b];
        eval.bins[b].hi = kBinEdges[b + 1];
    }

    std::array<int, 5> hits{};
    int total_hits = 0;
    for (const auto& c : per_case) {
        const std::size_t b = bin_of(c.probability);
        ++eval.bins[b].count;
        if (correct_prediction(c)) {
            ++hits[b];
            ++total_hits;
        }
    }
    for (std::size_t b = 0; b < 5; ++b)
        if (eval.bins[b].count > 0)
            eval.bins[b].accuracy =
                static_cast<double>(hits[b]) / static_cast<double>(eval.bins[b].count);
    eval.overall_accuracy =
        static_cast<double>(total_hits) / static_cast<double>(per_case.size());

    Rng rng(seed);
    std::array<std::vector<double>, 5> resample_acc;
    const auto n = static_cast<std::int64_t>(per_case.size());
    for (int r = 0; r < n_bootstrap; ++r) {
        std::array<int, 5> count{};
        std::array<int, 5> hit{};
        for (std::int64_t i = 0; i < n; ++i) {
            const auto pick = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
            const auto& c = per_case[pick];
            const std::size_t b = bin_of(c.probability);
            ++count[b];
            if (correct_prediction(c)) ++hit[b];
        }
        for (std::size_t b = 0; b < 5; ++b)
            if (count[b] > 0)
                resample_acc[b].push_back(static_cast<double>(hit[b]) /
                                          static_cast<double>(count[b]));
    }
    for (std::size_t b = 0; b < 5; ++b) {
        if (resample_acc[b].empty()) continue;
        double mean = 0.0;
        for (const double a : resample_acc[b]) mean += a;
        mean /= static_cast<double>(resample_acc[b].size());
        eval.bins[b].bootstrap_mean = mean;
        eval.bins[b].bootstrap_std = sample_std(resample_acc[b], mean);
    }

    eval.per_case = std::move(per_case);
    return eval;
}

std::string PredictionEval::to_json() const {
    nlohmann::json j;
    j["overall_accuracy"] = overall_accuracy;
    j["n_cases"] = per_case.size();
    j["n_bootstrap"] = n_bootstrap;
    nlohmann::json bins_json = nlohmann::json::array();
    for (const auto& b : bins) {
        nlohmann::json bj;
        bj["lo"] = b.lo;
        bj["hi"] = b.hi;
        bj["count"] = b.count;
        if (b.accuracy) bj["accuracy"] = *b.accuracy;
        if (b.bootstrap_mean) bj["bootstrap_mean"] = *b.bootstrap_mean;
        if (b.bootstrap_std) bj["bootstrap_std"] = *b.bootstrap_std;
        bins_json.push_back(std::move(bj));
    }
    j["bins"] = std::move(bins_json);
    return j.dump(2) + "\n";
}

std::string PredictionEval::bins_to_csv() const {
    std::ostringstream out;
    out << "lo,hi,count,accuracy,bootstrap_mean,bootstrap_std\n";
    for (const auto& b : bins) {
        out << format_double(b.lo) << ',' << format_double(b.hi) << ',' << b.count << ',';
        if (b.accuracy) out << format_double(*b.accuracy);
        out << ',';
        if (b.bootstrap_mean) out << format_double(*b.bootstrap_mean);
        out << ',';
        if (b.bootstrap_std) out << format_double(*b.bootstrap_std);
        out << '\n';
    }
    return out.str();
}

void PredictionEval::write_json(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json());
}

void PredictionEval::write_bins_csv(const std::filesystem::path& path) const {
    write_file_atomic(path, bins_to_csv());
}

std::string to_string(PredictabilityFlag flag) {
    switch (flag) {
        case PredictabilityFlag::under: return "under";
        case PredictabilityFlag::within: return "within";
        case PredictabilityFlag::over: return "over";
    }
    throw std::invalid_argument("unknown predictability flag");
}

JudgeSignificance judge_significance(const std::vector<CasePrediction>& per_case,
                                     int min_cases, double kappa, double alpha,
                                     int n_repetitions, std::uint64_t seed) {
    validate_predictions(per_case);
    if (min_cases < 2) throw std::invalid_argument("min_cases must be at least 2");
    if (kappa < 0.0 || kappa >= 0.5)
        throw std::invalid_argument("kappa must lie in [0, 0.5)");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0, 1)");
    if (n_repetitions < 1) throw std::invalid_argument("need at least one repetition");

    // confident cases only, grouped per judge in sorted order
    std::map<std::string, std::vector<const CasePrediction*>> by_judge;
    for (const auto& c : per_case)
        if (std::abs(c.probability - 0.5) >= kappa) by_judge[c.judge_id].push_back(&c);

    // a judge qualifies when balancing can keep at least min_cases rows, i.e.
    // each class holds at least min_cases / 2 of the confident cases
    std::vector<std::pair<std::string, std::vector<const CasePrediction*>>> qualified;
    for (auto& [judge_id, cases] : by_judge) {
        int wins = 0;
        for (const auto* c : cases) wins += c->label;
        const int losses = static_cast<int>(cases.size()) - wins;
        if (2 * std::min(wins, losses) >= min_cases)
            qualified.emplace_back(judge_id, std::move(cases));
    }
    if (qualified.empty())
        throw std::runtime_error("no judge has enough confidently predicted cases");

    JudgeSignificance out;
    out.kappa = kappa;
    out.alpha = alpha;
    out.min_cases = min_cases;
    out.n_repetitions = n_repetitions;
    out.n_qualified = static_cast<int>(qualified.size());

    const Rng base(seed);
    std::vector<double> fractions_raw, fractions_bh;
    for (int rep = 0; rep < n_repetitions; ++rep) {
        Rng rng = base.child(static_cast<std::uint64_t>(rep));
        SignificanceRepetition result;
        result.repetition = rep;

        std::vector<double> raw_ps;
        for (const auto& [judge_id, cases] : qualified) {
            Eigen::VectorXd labels(static_cast<Eigen::Index>(cases.size()));
            for (std::size_t i = 0; i < cases.size(); ++i)
                labels(static_cast<Eigen::Index>(i)) = cases[i]->label;
            const std::vector<int> kept = balance_downsample(labels, rng);

            JudgeSignificanceRecord record;
            record.judge_id = judge_id;
            record.n_balanced = static_cast<int>(kept.size());
            for (const int idx : kept)
                if (correct_prediction(*cases[static_cast<std::size_t>(idx)]))
                    ++record.n_correct;
            record.accuracy = static_cast<double>(record.n_correct) /
                              static_cast<double>(record.n_balanced);
            record.p_raw = binomial_two_sided(record.n_correct, record.n_balanced, 0.5);
            const BinomialBounds bounds =
                binomial_central_bounds(record.n_balanced, 1.0 - alpha);
            record.ci_low = static_cast<double>(bounds.k_under) /
                            static_cast<double>(record.n_balanced);
            record.ci_high = static_cast<double>(bounds.k_over) /
                             static_cast<double>(record.n_balanced);
            if (record.n_correct >= bounds.k_over)
                record.flag = PredictabilityFlag::over;
            else if (record.n_correct <= bounds.k_under)
                record.flag = PredictabilityFlag::under;
            raw_ps.push_back(record.p_raw);
            result.per_judge.push_back(std::move(record));
        }

        const CorrectionResult bh =
            correct_pvalues(raw_ps, Correction::benjamini_hochberg, alpha);
        for (std::size_t i = 0; i < result.per_judge.size(); ++i) {
            result.per_judge[i].p_bh = bh.adjusted[i];
            if (bh.reject[i]) ++result.n_bh_flagged;
            if (result.per_judge[i].flag == PredictabilityFlag::over) ++result.n_over;
            if (result.per_judge[i].flag == PredictabilityFlag::under) ++result.n_under;
        }
        const auto n_judges = static_cast<double>(result.per_judge.size());
        result.fraction_flagged_raw =
            static_cast<double>(result.n_over + result.n_under) / n_judges;
        result.fraction_flagged_bh = static_cast<double>(result.n_bh_flagged) / n_judges;
        fractions_raw.push_back(result.fraction_flagged_raw);
        fractions_bh.push_back(result.fraction_flagged_bh);
        out.repetitions.push_back(std::move(result));
    }

    const auto mean_of = [](const std::vector<double>& v) {
        double total = 0.0;
        for (const double x : v) total += x;
        return total / static_cast<double>(v.size());
    };
    out.mean_fraction_raw = mean_of(fractions_raw);
    out.std_fraction_raw = sample_std(fractions_raw, out.mean_fraction_raw);
    out.mean_fraction_bh = mean_of(fractions_bh);
    out.std_fraction_bh = sample_std(fractions_bh, out.mean_fraction_bh);
    return out;
}

std::string JudgeSignificance::to_json() const {
    nlohmann::json j;
    j["kappa"] = kappa;
    j["alpha"] = alpha;
    j["min_cases"] = min_cases;
    j["n_repetitions"] = n_repetitions;
    j["n_qualified"] = n_qualified;
    j["mean_fraction_raw"] = mean_fraction_raw;
    j["std_fraction_raw"] = std_fraction_raw;
    j["mean_fraction_bh"] = mean_fraction_bh;
    j["std_fraction_bh"] = std_fraction_bh;
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : repetitions)
        reps.push_back({{"repetition", r.repetition},
                        {"n_over", r.n_over},
                        {"n_under", r.n_under},
                        {"n_bh_flagged", r.n_bh_flagged},
                        {"fraction_flagged_raw", r.fraction_flagged_raw},
                        {"fraction_flagged_bh", r.fraction_flagged_bh}});
    j["repetitions"] = std::move(reps);
    return j.dump(2) + "\n";
}

std::string JudgeSignificance::to_csv() const {
    std::ostringstream out;
    out << "repetition,judge_id,n_balanced,n_correct,accuracy,ci_low,ci_high,"
           "p_raw,p_bh,flag\n";
    for (const auto& r : repetitions)
        for (const auto& j : r.per_judge)
            out << r.repetition << ',' << j.judge_id << ',' << j.n_balanced << ','
                << j.n_correct << ',' << format_double(j.accuracy) << ','
                << format_double(j.ci_low) << ',' << format_double(j.ci_high) << ','
                << format_double(j.p_raw) << ',' << format_double(j.p_bh) << ','
                << to_string(j.flag) << '\n';
    return out.str();
}

void JudgeSignificance::write_json(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json());
}

void JudgeSignificance::write_csv(const std::filesystem::path& path) const {
    write_file_atomic(path, to_csv());
}

}  // namespace courtaudit
