#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace courtaudit {

struct NmfConfig {
    int k = 30;           // embedding dimension
    double l1_w = 0.0;    // L1 weight on W
    double l2_w = 0.0;    // L2 weight on W (applied as l2/2 * ||W||_F^2)
    double l1_h = 0.0;
    double l2_h = 0.0;
    double tol = 1e-6;    // stop when the relative objective decrease drops below
    int max_iter = 500;   // full update sweeps
    std::uint64_t seed = 0;
    bool multiplicative = false;  // use multiplicative updates instead of HALS
};

struct NmfModel {
    Eigen::MatrixXd W;  // m x k, non-negative
    Eigen::MatrixXd H;  // k x n, non-negative
    NmfConfig config;
    std::vector<double> objective_trace;  // objective after init and each sweep

    void save(const std::filesystem::path& directory) const;
    static NmfModel load(const std::filesystem::path& directory);
};

// 0.5*||C - WH||_F^2 + l1_w*||W||_1 + 0.5*l2_w*||W||_F^2
//                    + l1_h*||H||_1 + 0.5*l2_h*||H||_F^2
double nmf_objective(const Eigen::MatrixXd& C, const Eigen::MatrixXd& W,
                     const Eigen::MatrixXd& H, const NmfConfig& config);

// Alternating minimization from a seeded scale-matched random start.
// Default solver is hierarchical alternating least squares (exact
// non-negative coordinate updates per factor column), which keeps the
// objective non-increasing sweep over sweep; multiplicative updates are the
// cross-check alternative. Throws on negative entries in C or k outside
// [1, min(m, n)].
NmfModel nmf_fit(const Eigen::MatrixXd& C, const NmfConfig& config);

// ||C - WH||_F / ||C||_F; throws when C has zero norm.
double reconstruction_error(const Eigen::MatrixXd& C, const NmfModel& model);

}  // namespace courtaudit
