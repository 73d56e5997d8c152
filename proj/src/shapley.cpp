#include "courtaudit/shapley.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "courtaudit/rng.hpp"
#include "courtaudit/text_io.hpp"

namespace courtaudit {

namespace {

constexpr int kMaxExactFeatures = 15;

double coalition_value(const PredictFn& model, const Eigen::MatrixXd& background,
                       const Eigen::RowVectorXd& x, std::uint32_t mask) {
    Eigen::MatrixXd composite = background;
    for (Eigen::Index j = 0; j < x.size(); ++j)
        if (mask & (1u << j)) composite.col(j).setConstant(x(j));
    return model(composite).mean();
}

}  // namespace

std::string to_string(ShapleyMethod method) {
    switch (method) {
        case ShapleyMethod::exact_enumeration: return "exact_enumeration";
        case ShapleyMethod::permutation_sampling: return "permutation_sampling";
    }
    throw std::invalid_argument("unknown shapley method");
}

Eigen::VectorXd ShapleyReport::mean_abs() const {
    return values.cwiseAbs().colwise().mean();
}

std::string ShapleyReport::to_csv() const {
    std::ostringstream out;
    out << "row,prediction,base_value";
    for (const auto& name : feature_names) out << ',' << name;
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        out << i << ',' << format_double(predictions(i)) << ','
            << format_double(base_value);
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            out << ',' << format_double(values(i, j));
        out << '\n';
    }
    return out.str();
}

ShapleyReport shapley_importance(const PredictFn& model, const Eigen::MatrixXd& rows,
                                 const Eigen::MatrixXd& background,
                                 ShapleyMethod method, int n_samples,
                                 std::uint64_t seed,
                                 std::vector<std::string> feature_names) {
    if (rows.rows() == 0) throw std::invalid_argument("no rows to explain");
    if (background.rows() == 0) throw std::invalid_argument("background sample is empty");
    if (rows.cols() != background.cols())
        throw std::invalid_argument("rows and background have different feature counts");
    const int p = static_cast<int>(rows.cols());
    if (p < 1) throw std::invalid_argument("need at least one feature");
    if (method == ShapleyMethod::exact_enumeration && p > kMaxExactFeatures)
        throw std::invalid_argument("exact enumeration supports at most 15 features");
    if (method == ShapleyMethod::permutation_sampling && n_samples < 1)
        throw std::invalid_argument("need at least one permutation sample");
    if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(p))
        throw std::invalid_argument("feature name count does not match columns");
    if (feature_names.empty())
        for (int j = 0; j < p; ++j) feature_names.push_back("x" + std::to_string(j));

    ShapleyReport report;
    report.feature_names = std::move(feature_names);
    report.method = method;
    report.n_samples = method == ShapleyMethod::permutation_sampling ? n_samples : 0;
    report.base_value = model(background).mean();
    report.predictions = model(rows);
    report.values = Eigen::MatrixXd::Zero(rows.rows(), p);

    if (method == ShapleyMethod::exact_enumeration) {
        // coalition weight |S|! (p-|S|-1)! / p! by coalition size
        std::vector<double> weight(static_cast<std::size_t>(p));
        for (int s = 0; s < p; ++s) {
            double w = 1.0 / static_cast<double>(p);
            for (int t = 1; t <= s; ++t)
                w *= static_cast<double>(t) / static_cast<double>(p - t);
            weight[static_cast<std::size_t>(s)] = w;
        }
        const std::uint32_t n_masks = 1u << p;
        std::vector<double> value(n_masks);
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            const Eigen::RowVectorXd x = rows.row(i);
            for (std::uint32_t mask = 0; mask < n_masks; ++mask)
                value[mask] = coalition_value(model, background, x, mask);
            for (int j = 0; j < p; ++j) {
                const std::uint32_t bit = 1u << j;
                double phi = 0.0;
                for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
                    if (mask & bit) continue;
                    const int size = std::popcount(mask);
                    phi += weight[static_cast<std::size_t>(size)] *
                           (value[mask | bit] - value[mask]);
                }
                report.values(i, j) = phi;
            }
        }
        return report;
    }

    Rng rng(seed);
    Eigen::MatrixXd se = Eigen::MatrixXd::Zero(rows.rows(), p);
    std::vector<int> order(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const Eigen::RowVectorXd x = rows.row(i);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
        Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(p);
        for (int s = 0; s < n_samples; ++s) {
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(order);
            Eigen::MatrixXd composite = background;
            double prev = report.base_value;
            for (const int j : order) {
                composite.col(j).setConstant(x(j));
                const double cur = model(composite).mean();
                const double contribution = cur - prev;
                sum(j) += contribution;
                sum_sq(j) += contribution * contribution;
                prev = cur;
            }
        }
        for (int j = 0; j < p; ++j) {
            const double mean = sum(j) / n_samples;
            report.values(i, j) = mean;
            if (n_samples > 1) {
                const double var =
                    (sum_sq(j) - n_samples * mean * mean) / (n_samples - 1);
                se(i, j) = std::sqrt(std::max(var, 0.0) / n_samples);
            }
        }
    }
    report.mc_std_err = std::move(se);
    return report;
}

}  // namespace courtaudit
