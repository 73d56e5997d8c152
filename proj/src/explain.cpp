#include "courtaudit/explain.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "courtaudit/logistic.hpp"
#include "courtaudit/text_io.hpp"

namespace courtaudit {

namespace {

void check_not_constant(const Eigen::VectorXd& values, const std::string& attribute) {
    if (values.maxCoeff() - values.minCoeff() <= 0.0)
        throw std::invalid_argument("attribute '" + attribute + "' is constant");
}

AttributeFit linear_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        double l2, const std::string& attribute) {
    check_not_constant(y, attribute);
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd Z(n, X.cols() + 1);
    Z.col(0).setOnes();
    Z.rightCols(X.cols()) = X;
    Eigen::MatrixXd normal = Z.transpose() * Z;
    for (Eigen::Index j = 1; j < Z.cols(); ++j) normal(j, j) += l2;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().minCoeff() <= 1e-12 * ldlt.vectorD().maxCoeff())
        throw std::runtime_error("singular design for attribute '" + attribute + "'");
    AttributeFit fit;
    fit.attribute = attribute;
    fit.fit_type = "linear";
    fit.coefficients = ldlt.solve(Z.transpose() * y);
    const double ss_res = (y - Z * fit.coefficients).squaredNorm();
    const double ss_tot = (y.array() - y.mean()).square().sum();
    fit.r2 = 1.0 - ss_res / ss_tot;
    return fit;
}

AttributeFit logistic_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          double l2, const std::string& attribute) {
    check_not_constant(y, attribute);
    const LogisticFit model = fit_logistic(X, y, l2);
    AttributeFit fit;
    fit.attribute = attribute;
    fit.fit_type = "logistic";
    fit.coefficients = model.coef;
    fit.r2 = model.pseudo_r2;
    return fit;
}

}  // namespace

std::string BiographicsReport::to_csv() const {
    std::ostringstream out;
    out << "attribute,fit_type,r2";
    for (const auto& name : coefficient_names) out << ',' << name;
    out << '\n';
    for (const auto& fit : fits) {
        out << fit.attribute << ',' << fit.fit_type << ',' << format_double(fit.r2);
        for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j)
            out << ',' << format_double(fit.coefficients(j));
        out << '\n';
    }
    return out.str();
}

void BiographicsReport::write_csv(const std::filesystem::path& path) const {
    write_file_atomic(path, to_csv());
}

BiographicsReport explain_biographics(const Eigen::MatrixXd& embeddings,
                                      const std::vector<JudgeAttributes>& attributes,
                                      double l2) {
    const Eigen::Index n = embeddings.rows();
    if (n == 0) throw std::invalid_argument("no embedding rows");
    if (static_cast<std::size_t>(n) != attributes.size())
        throw std::invalid_argument("attribute count does not match embedding rows");
    if (embeddings.cols() < 1) throw std::invalid_argument("embeddings have no dimensions");
    if (n < 3) throw std::invalid_argument("need at least 3 judges to fit");
    if (!(l2 >= 0.0) || !std::isfinite(l2))
        throw std::invalid_argument("l2 must be a finite non-negative value");
    for (const auto& a : attributes) {
        if ((a.gender_male != 0 && a.gender_male != 1) ||
            (a.party_republican != 0 && a.party_republican != 1) ||
            (a.promoted != 0 && a.promoted != 1))
            throw std::invalid_argument("binary attributes must be 0 or 1");
    }

    BiographicsReport report;
    report.coefficient_names.push_back("intercept");
    for (Eigen::Index j = 0; j < embeddings.cols(); ++j)
        report.coefficient_names.push_back("dim_" + std::to_string(j));

    auto column = [&](auto getter) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = static_cast<double>(getter(attributes[static_cast<std::size_t>(i)]));
        return v;
    };

    report.fits.push_back(linear_fit(
        embeddings, column([](const JudgeAttributes& a) { return a.experience; }), l2,
        "experience"));
    report.fits.push_back(linear_fit(
        embeddings, column([](const JudgeAttributes& a) { return a.win_rate; }), l2,
        "win_rate"));
    report.fits.push_back(linear_fit(
        embeddings, column([](const JudgeAttributes& a) { return a.workload; }), l2,
        "workload"));
    report.fits.push_back(logistic_fit(
        embeddings, column([](const JudgeAttributes& a) { return a.gender_male; }), l2,
        "gender_male"));
    report.fits.push_back(logistic_fit(
        embeddings, column([](const JudgeAttributes& a) { return a.party_republican; }),
        l2, "party_republican"));
    report.fits.push_back(logistic_fit(
        embeddings, column([](const JudgeAttributes& a) { return a.promoted; }), l2,
        "promoted"));
    return report;
}

}  // namespace courtaudit
