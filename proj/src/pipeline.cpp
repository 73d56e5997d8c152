#include "courtaudit/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "courtaudit/predictors.hpp"
#include "courtaudit/rng.hpp"

namespace courtaudit {

NmfModel nmf_fit_restarts(const Eigen::MatrixXd& C, NmfConfig config, int restarts) {
    if (restarts < 1) throw std::invalid_argument("need at least one restart");
    const std::uint64_t base_seed = config.seed;
    NmfModel best;
    double best_objective = 0.0;
    for (int r = 0; r < restarts; ++r) {
        config.seed = base_seed + static_cast<std::uint64_t>(r);
        NmfModel candidate = nmf_fit(C, config);
        const double objective = candidate.objective_trace.back();
        if (r == 0 || objective < best_objective) {
            best_objective = objective;
            best = std::move(candidate);
        }
    }
    return best;
}

std::map<std::string, Eigen::VectorXd> judge_embeddings(const CitationMatrix& matrix,
                                                        const NmfModel& model) {
    if (model.W.rows() != static_cast<Eigen::Index>(matrix.judges.size()))
        throw std::invalid_argument("factorization rows do not match the matrix judges");
    std::map<std::string, Eigen::VectorXd> out;
    for (std::size_t i = 0; i < matrix.judges.size(); ++i) {
        if (matrix.window_meta[i].all_zero) continue;
        out[matrix.judges[i]] = model.W.row(static_cast<Eigen::Index>(i)).transpose();
    }
    return out;
}

std::set<std::string> early_window_case_ids(const Dataset& data, double fraction) {
    std::set<std::string> out;
    for (const auto& judge_id : data.judge_ids_sorted()) {
        if (data.cases_of_judge(judge_id).empty()) continue;
        for (const std::size_t idx : early_career_window(data, judge_id, fraction))
            out.insert(data.cases[idx].case_id);
    }
    return out;
}

namespace {

// rows outside the early-career windows, in original order
std::vector<int> guarded_rows(const DesignMatrix& design,
                              const std::set<std::string>& excluded) {
    std::vector<int> kept;
    for (int i = 0; i < design.n_rows(); ++i)
        if (!excluded.count(design.case_ids[static_cast<std::size_t>(i)]))
            kept.push_back(i);
    return kept;
}

bool has_both_classes(const Eigen::VectorXd& y) {
    bool zero = false, one = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) == 1.0 ? one : zero) = true;
    return zero && one;
}

}  // namespace

PredictabilityResult run_predictability(const Dataset& data,
                                        const PredictabilityParams& params) {
    if (params.nmf_restarts < 1) throw std::invalid_argument("need at least one restart");
    if (params.min_rows_per_type < 8)
        throw std::invalid_argument("min_rows_per_type must be at least 8");

    PredictabilityResult result;
    result.matrix = build_citation_matrix(data, params.citation);
    result.embedding = nmf_fit_restarts(result.matrix.values, params.nmf,
                                        params.nmf_restarts);
    result.embeddings = judge_embeddings(result.matrix, result.embedding);

    const std::set<std::string> excluded =
        early_window_case_ids(data, params.citation.fraction);
    const Rng root(params.seed);

    for (int t = 0; t < kNumCaseTypes; ++t) {
        const auto type = static_cast<CaseType>(t);
        DesignMatrix design = embedding_design(data, type, result.embeddings);
        design = design.subset(guarded_rows(design, excluded));
        if (design.n_rows() < params.min_rows_per_type) continue;
        if (!has_both_classes(design.y)) continue;

        Rng split_rng = root.child(100 + static_cast<std::uint64_t>(t));
        const auto [train_idx, test_idx] =
            split_train_test(design.n_rows(), params.train_ratio, split_rng);
        DesignMatrix train = design.subset(train_idx);
        const DesignMatrix test = design.subset(test_idx);
        if (!has_both_classes(train.y) || test.n_rows() == 0) continue;
        if (params.balance_training) {
            Rng balance_rng = root.child(200 + static_cast<std::uint64_t>(t));
            train = train.subset(balance_downsample(train.y, balance_rng));
        }

        TypeModel fitted;
        fitted.type = type;
        fitted.n_train = train.n_rows();
        fitted.n_test = test.n_rows();
        if (params.use_cv) {
            GbdtCvConfig cv = params.cv;
            cv.seed = root.child(300 + static_cast<std::uint64_t>(t)).next_u64();
            GbdtCvResult cv_result =
                fit_gbdt_cv(train.X, train.y, cv, train.feature_names);
            fitted.config_used = cv_result.best_config;
            fitted.cv_accuracy = cv_result.best_accuracy;
            fitted.model = std::move(cv_result.model);
        } else {
            fitted.model = fit_gbdt(train.X, train.y, params.gbdt, train.feature_names);
            fitted.config_used = params.gbdt;
        }

        const Eigen::VectorXd probs = fitted.model.predict_proba(test.X);
        for (int i = 0; i < test.n_rows(); ++i) {
            const auto row = static_cast<std::size_t>(i);
            result.test_predictions.push_back({test.case_ids[row], test.judge_ids[row],
                                               probs(i),
                                               test.y(i) == 1.0 ? 1 : 0});
        }
        result.models.push_back(std::move(fitted));
    }

    if (result.test_predictions.empty())
        throw std::runtime_error("no case type produced a usable model");

    // quintile accuracy on a balanced subset of the pooled test predictions
    Eigen::VectorXd labels(static_cast<Eigen::Index>(result.test_predictions.size()));
    for (std::size_t i = 0; i < result.test_predictions.size(); ++i)
        labels(static_cast<Eigen::Index>(i)) = result.test_predictions[i].label;
    std::vector<CasePrediction> eval_cases;
    if (has_both_classes(labels)) {
        Rng eval_rng = root.child(400);
        for (const int idx : balance_downsample(labels, eval_rng))
            eval_cases.push_back(result.test_predictions[static_cast<std::size_t>(idx)]);
    } else {
        eval_cases = result.test_predictions;
    }
    result.eval = bin_accuracy(std::move(eval_cases), params.n_bootstrap,
                               root.child(401).next_u64());

    result.significance =
        judge_significance(result.test_predictions, params.min_cases, params.kappa,
                           params.alpha, params.n_repetitions,
                           root.child(500).next_u64());

    std::map<std::string, int> over_counts;
    for (const auto& rep : result.significance.repetitions)
        for (const auto& judge : rep.per_judge)
            if (judge.flag == PredictabilityFlag::over) ++over_counts[judge.judge_id];
    for (const auto& [judge_id, count] : over_counts)
        if (2 * count > result.significance.n_repetitions)
            result.over_flagged.insert(judge_id);
    return result;
}

}  // namespace courtaudit
