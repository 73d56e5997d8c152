#include "courtaudit/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "courtaudit/text_io.hpp"

namespace courtaudit {

namespace {

constexpr double kGradientTol = 1e-8;
// Unpenalized coefficients beyond this magnitude signal separation: the
// gradient of a separable fit vanishes numerically near 22, so finite
// "convergence" past this bound is a saturated, not a true, optimum.
constexpr double kDivergenceBound = 20.0;
constexpr double kZ975 = 1.959963984540054;  // 97.5% standard normal quantile

double log1p_exp(double t) {
    // log(1 + e^t), stable for large |t|
    return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double penalized_ll(const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& beta, double l2) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        ll += y(i) * eta(i) - log1p_exp(eta(i));
    const double penalty = 0.5 * l2 * beta.tail(beta.size() - 1).squaredNorm();
    return ll - penalty;
}

std::string diverging_terms(const Eigen::VectorXd& beta,
                            const std::vector<std::string>& names) {
    std::string out;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (std::abs(beta(j)) >= kDivergenceBound / 2.0) {
            if (!out.empty()) out += ", ";
            out += names[static_cast<std::size_t>(j)];
        }
    }
    return out.empty() ? names.front() : out;
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace

double logistic_log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    if (eta.size() != y.size()) throw std::invalid_argument("eta and y lengths differ");
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        ll += y(i) * eta(i) - log1p_exp(eta(i));
    return ll;
}

Eigen::VectorXd LogisticFit::predict_proba(const Eigen::MatrixXd& X) const {
    if (X.cols() + 1 != coef.size())
        throw std::invalid_argument("feature count does not match the fitted schema");
    Eigen::VectorXd eta =
        (X * coef.tail(coef.size() - 1)).array() + coef(0);
    Eigen::VectorXd p(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double v = 1.0 / (1.0 + std::exp(-eta(i)));
        p(i) = std::clamp(v, 1e-15, 1.0 - 1e-15);
    }
    return p;
}

std::string LogisticFit::coefficient_table_csv() const {
    std::ostringstream out;
    out << "term,coef,std_err,z,p_value,ci_low,ci_high\n";
    for (Eigen::Index j = 0; j < coef.size(); ++j) {
        out << feature_names[static_cast<std::size_t>(j)] << ',' << format_double(coef(j))
            << ',' << format_double(std_err(j)) << ',' << format_double(z_value(j)) << ','
            << format_double(p_value(j)) << ',' << format_double(ci_low(j)) << ','
            << format_double(ci_high(j)) << '\n';
    }
    return out.str();
}

void LogisticFit::write_csv(const std::filesystem::path& path) const {
    write_file_atomic(path, coefficient_table_csv());
}

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         double l2_weight, std::vector<std::string> feature_names) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n == 0) throw std::invalid_argument("no rows to fit");
    if (y.size() != n) throw std::invalid_argument("label count does not match rows");
    if (l2_weight < 0.0) throw std::invalid_argument("l2 weight must be non-negative");
    for (Eigen::Index i = 0; i < n; ++i)
        if (y(i) != 0.0 && y(i) != 1.0)
            throw std::invalid_argument("labels must be 0 or 1");
    if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(p))
        throw std::invalid_argument("feature name count does not match columns");
    if (feature_names.empty())
        for (Eigen::Index j = 0; j < p; ++j)
            feature_names.push_back("x" + std::to_string(j));
    feature_names.insert(feature_names.begin(), "intercept");

    const double y_mean = y.mean();
    if (y_mean == 0.0 || y_mean == 1.0)
        throw std::runtime_error(
            "perfect separation: single-class labels drive the intercept to infinity");

    Eigen::MatrixXd Z(n, p + 1);
    Z.col(0).setOnes();
    if (p > 0) Z.rightCols(p) = X;

    Eigen::VectorXd penalty_diag = Eigen::VectorXd::Constant(p + 1, l2_weight);
    penalty_diag(0) = 0.0;  // intercept unpenalized

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
    beta(0) = std::log(y_mean / (1.0 - y_mean));
    Eigen::VectorXd eta = Z * beta;
    double current_pll = penalized_ll(eta, y, beta, l2_weight);

    LogisticFit fit;
    fit.feature_names = std::move(feature_names);
    fit.l2_weight = l2_weight;

    Eigen::MatrixXd info(p + 1, p + 1);
    const int max_iter = 500;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        Eigen::VectorXd prob(n), weight(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            prob(i) = 1.0 / (1.0 + std::exp(-eta(i)));
            weight(i) = prob(i) * (1.0 - prob(i));
        }
        Eigen::VectorXd grad =
            Z.transpose() * (y - prob) - penalty_diag.cwiseProduct(beta);
        const double grad_norm = grad.norm();
        if (grad_norm < kGradientTol) break;

        info = Z.transpose() * weight.asDiagonal() * Z;
        info.diagonal() += penalty_diag;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success)
            throw std::runtime_error("singular information matrix");
        const Eigen::VectorXd d = ldlt.vectorD();
        if (d.minCoeff() <= 1e-12 * std::max(d.maxCoeff(), 1.0)) {
            if (l2_weight == 0.0 &&
                beta.cwiseAbs().maxCoeff() > kDivergenceBound / 2.0)
                throw std::runtime_error("perfect separation suspected; diverging terms: " +
                                         diverging_terms(beta, fit.feature_names));
            throw std::runtime_error("singular information matrix");
        }
        const Eigen::VectorXd step = ldlt.solve(grad);

        // damped ascent: halve the step until the penalized likelihood improves
        double t = 1.0;
        Eigen::VectorXd candidate, candidate_eta;
        double candidate_pll = -std::numeric_limits<double>::infinity();
        while (t >= 1e-12) {
            candidate = beta + t * step;
            candidate_eta = Z * candidate;
            candidate_pll = penalized_ll(candidate_eta, y, candidate, l2_weight);
            if (candidate_pll >= current_pll) break;
            t *= 0.5;
        }
        if (candidate_pll < current_pll)
            throw std::runtime_error("newton step failed to improve the likelihood");
        const double improvement = candidate_pll - current_pll;
        beta = candidate;
        eta = candidate_eta;
        current_pll = candidate_pll;

        // with l2 > 0 the penalized optimum is finite, so divergence can only
        // mean separation in an unpenalized fit
        if (l2_weight == 0.0 && beta.cwiseAbs().maxCoeff() > kDivergenceBound)
            throw std::runtime_error("perfect separation suspected; diverging terms: " +
                                     diverging_terms(beta, fit.feature_names));

        // near the optimum, quadratic convergence can hit the floating-point
        // floor of the objective before the absolute gradient tolerance; the
        // gradient is then as small as the row count allows
        if (grad_norm < 1e-4 &&
            improvement <= 1e-15 * std::max(1.0, std::abs(current_pll))) {
            ++iter;
            break;
        }
    }
    if (iter == max_iter)
        throw std::runtime_error(
            "logistic fit did not reach the gradient tolerance in 500 iterations");

    // observed information at the optimum for Wald standard errors
    Eigen::VectorXd prob(n), weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        prob(i) = 1.0 / (1.0 + std::exp(-eta(i)));
        weight(i) = prob(i) * (1.0 - prob(i));
    }
    info = Z.transpose() * weight.asDiagonal() * Z;
    info.diagonal() += penalty_diag;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    const Eigen::VectorXd d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success ||
        d.minCoeff() <= 1e-12 * std::max(d.maxCoeff(), 1.0))
        throw std::runtime_error("singular information matrix at the optimum");
    const Eigen::MatrixXd cov =
        ldlt.solve(Eigen::MatrixXd::Identity(p + 1, p + 1));

    fit.coef = beta;
    fit.n_iterations = iter;
    fit.std_err.resize(p + 1);
    fit.z_value.resize(p + 1);
    fit.p_value.resize(p + 1);
    fit.ci_low.resize(p + 1);
    fit.ci_high.resize(p + 1);
    for (Eigen::Index j = 0; j <= p; ++j) {
        fit.std_err(j) = std::sqrt(cov(j, j));
        fit.z_value(j) = beta(j) / fit.std_err(j);
        fit.p_value(j) = normal_two_sided_p(fit.z_value(j));
        fit.ci_low(j) = beta(j) - kZ975 * fit.std_err(j);
        fit.ci_high(j) = beta(j) + kZ975 * fit.std_err(j);
    }

    fit.log_likelihood = logistic_log_likelihood(eta, y);
    fit.null_log_likelihood =
        static_cast<double>(n) *
        (y_mean * std::log(y_mean) + (1.0 - y_mean) * std::log(1.0 - y_mean));
    fit.pseudo_r2 = fit.null_log_likelihood == 0.0
                        ? 0.0
                        : 1.0 - fit.log_likelihood / fit.null_log_likelihood;
    return fit;
}

}  // namespace courtaudit
