#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "courtaudit/pipeline.hpp"
#include "courtaudit/types.hpp"

namespace courtaudit {

enum class AssignmentMode { random, biased };
enum class BiasMode { uniform_shift, case_type_interaction };

std::string to_string(AssignmentMode mode);
std::string to_string(BiasMode mode);

struct CourtConfig {
    int n_judges = 40;
    int n_cases = 8000;
    int n_case_types = 4;  // uses the first n values of the CaseType enum
    int n_circuits = 3;    // uses the first n values of the Circuit enum
    int start_year = 1980;
    int n_years = 20;
    // distribution over case types per (circuit, decade) cell, indexed
    // circuit-major; empty = drawn from a Dirichlet at simulation time
    std::vector<std::vector<double>> case_type_rates;

    AssignmentMode assignment_mode = AssignmentMode::random;
    double assignment_strength = 0.0;  // log-odds scale of judge-type preference

    double base_win_rate = 0.25;
    BiasMode bias_mode = BiasMode::uniform_shift;
    std::vector<double> judge_bias;  // explicit per-judge log-odds; empty = derive
    double bias_fraction = 0.0;      // share of judges given planted_bias
    double planted_bias = 0.0;

    double date_drift = 0.0;  // log-odds per year, centered on the window midpoint
    std::vector<double> circuit_offsets;  // per used circuit; empty = all zero

    int k_pools = 3;        // latent precedent pools behind the citation mixtures
    int n_precedents = 60;  // citable precedent universe
    int citations_per_case = 6;
    double ideology_bias_link = 0.0;  // 0 = independent; 1 = planted judges cite pool 0

    std::uint64_t seed = 0;
};

// Latent generator state. Only power-study scoring reads it; pipeline stages
// consume the Dataset alone.
struct GroundTruth {
    std::vector<std::string> judge_ids;  // main judges, excludes the historic judge
    std::vector<double> judge_bias;
    std::vector<std::string> planted;  // judges with nonzero bias, sorted
    Eigen::MatrixXd ideology;          // n_judges x k_pools, rows sum to 1
    Eigen::MatrixXd pool_profiles;     // k_pools x n_precedents, rows sum to 1
    std::vector<double> case_type_sign;  // +1 / -1 per case type
    std::vector<double> circuit_offsets;
    double date_drift = 0.0;
    double base_win_rate = 0.25;

    bool is_planted(const std::string& judge_id) const;

    std::string to_json() const;
    void write_json(const std::filesystem::path& path) const;
};

struct SimulatedCourt {
    Dataset data;
    GroundTruth truth;
};

// Draws a full court from the config: precedent cases decided before the
// window by a historic judge, then n_cases main cases with seeded assignment,
// outcomes from sigmoid(logit(base) + bias + drift + circuit offset), and
// citations from each judge's ideology-weighted mixture of precedent pools.
SimulatedCourt simulate_court(const CourtConfig& config);

enum class PipelineStage { assignment, deviation, predictability };
std::string to_string(PipelineStage stage);

struct PowerGridPoint {
    std::string label;
    CourtConfig config;
};

struct PowerOptions {
    int n_replicates = 50;
    double alpha = 0.10;    // per-judge flag level (deviation raw, judge-test CI)
    double by_alpha = 0.05; // Benjamini-Yekutieli level for the assignment stage
    PredictabilityParams predictability{};  // used only for that stage
    std::uint64_t seed = 0;
};

struct PowerCell {
    std::string label;
    int n_replicates = 0;
    // units are judges for deviation/predictability, whole courts for assignment
    int n_planted = 0;
    int n_impartial = 0;
    double power = 0.0;  // flagged fraction among planted units; 0 when none
    double power_std_err = 0.0;
    double false_flag_rate = 0.0;
    double false_flag_std_err = 0.0;
};

struct PowerStudy {
    PipelineStage stage = PipelineStage::deviation;
    double alpha = 0.10;
    std::vector<PowerCell> cells;

    std::string to_csv() const;
    std::string to_json() const;
    void write_csv(const std::filesystem::path& path) const;
    void write_json(const std::filesystem::path& path) const;
};

// Simulates n_replicates courts per grid point and scores the chosen stage
// against the ground truth: detection power over planted units, false-flag
// rate over impartial ones, with binomial Monte Carlo standard errors.
PowerStudy power_study(const std::vector<PowerGridPoint>& grid, PipelineStage stage,
                       const PowerOptions& options);

}  // namespace courtaudit
