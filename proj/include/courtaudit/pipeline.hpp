#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "courtaudit/citation.hpp"
#include "courtaudit/evaluation.hpp"
#include "courtaudit/gbdt.hpp"
#include "courtaudit/nmf.hpp"
#include "courtaudit/types.hpp"

namespace courtaudit {

// Fits the factorization from `restarts` seeded starts (config.seed, +1, ...)
// and keeps the run with the lowest final objective.
NmfModel nmf_fit_restarts(const Eigen::MatrixXd& C, NmfConfig config, int restarts);

// One embedding row (from W) per judge. Judges whose early-career window cited
// nothing inside the reference set carry no citation signal and get no row.
std::map<std::string, Eigen::VectorXd> judge_embeddings(const CitationMatrix& matrix,
                                                        const NmfModel& model);

// Case ids inside any judge's early-career window; the look-ahead guard keeps
// them out of classifier training and test sets.
std::set<std::string> early_window_case_ids(const Dataset& data, double fraction);

struct PredictabilityParams {
    CitationMatrixOptions citation{};  // early-window fraction, reference set size
    NmfConfig nmf{};                   // embedding dimension and solver knobs
    int nmf_restarts = 5;
    double train_ratio = 0.75;
    bool balance_training = true;
    bool use_cv = false;  // 3-fold grid search instead of the fixed config below
    GbdtCvConfig cv{};
    GbdtConfig gbdt{};
    int min_rows_per_type = 50;  // skip sparser case types
    int min_cases = 50;          // judge-test qualification threshold
    double kappa = 0.025;
    double alpha = 0.10;
    int n_repetitions = 30;
    int n_bootstrap = 100;
    std::uint64_t seed = 0;
};

// One outcome model per retained case type.
struct TypeModel {
    CaseType type = CaseType::other;
    int n_train = 0;  // rows fitted, after balancing
    int n_test = 0;
    GbdtConfig config_used{};
    double cv_accuracy = 0.0;  // best grid-point mean accuracy; 0 without CV
    GbdtModel model;
};

struct PredictabilityResult {
    CitationMatrix matrix;
    NmfModel embedding;
    std::map<std::string, Eigen::VectorXd> embeddings;
    std::vector<TypeModel> models;
    std::vector<CasePrediction> test_predictions;  // pooled across case types
    PredictionEval eval;             // quintile accuracy on a balanced test subset
    JudgeSignificance significance;  // per-judge test on the pooled predictions
    std::set<std::string> over_flagged;  // judges over in a majority of repetitions
};

// Full predictability chain: citation matrix -> NMF embedding -> per-case-type
// train/test split with balanced training -> pooled out-of-sample predictions
// -> quintile evaluation and per-judge significance. Early-window cases are
// excluded from every train and test set.
PredictabilityResult run_predictability(const Dataset& data,
                                        const PredictabilityParams& params);

}  // namespace courtaudit
