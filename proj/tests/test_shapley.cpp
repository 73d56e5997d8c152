#include "courtaudit/shapley.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "courtaudit/gbdt.hpp"
#include "courtaudit/rng.hpp"

using namespace courtaudit;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
    return m;
}

void check_efficiency(const ShapleyReport& report, double tol) {
    for (Eigen::Index i = 0; i < report.values.rows(); ++i) {
        const double total = report.values.row(i).sum() + report.base_value;
        CHECK(std::abs(total - report.predictions(i)) < tol);
    }
}

}  // namespace

TEST_CASE("additive model attributions are the per-feature deviations") {
    const PredictFn sum_model = [](const Eigen::MatrixXd& X) {
        return Eigen::VectorXd(X.col(0) + X.col(1));
    };
    const Eigen::MatrixXd background = random_matrix(10, 2, 4);
    const Eigen::MatrixXd rows = random_matrix(4, 2, 5);

    for (const auto method :
         {ShapleyMethod::exact_enumeration, ShapleyMethod::permutation_sampling}) {
        const ShapleyReport report =
            shapley_importance(sum_model, rows, background, method, 100, 3);
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            for (Eigen::Index j = 0; j < 2; ++j)
                CHECK(std::abs(report.values(i, j) -
                               (rows(i, j) - background.col(j).mean())) < 1e-9);
        CHECK(std::abs(report.base_value - background.colwise().mean().sum()) < 1e-12);
        check_efficiency(report, 1e-9);
    }
}

TEST_CASE("single-feature model puts the whole gap on that feature") {
    const PredictFn model = [](const Eigen::MatrixXd& X) {
        return Eigen::VectorXd(3.0 * X.col(0).array().square());
    };
    const Eigen::MatrixXd background = random_matrix(20, 1, 6);
    const Eigen::MatrixXd rows = random_matrix(3, 1, 7);
    for (const auto method :
         {ShapleyMethod::exact_enumeration, ShapleyMethod::permutation_sampling}) {
        const ShapleyReport report =
            shapley_importance(model, rows, background, method, 5, 0);
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            CHECK(std::abs(report.values(i, 0) -
                           (report.predictions(i) - report.base_value)) < 1e-12);
    }
}

TEST_CASE("two-feature interaction matches the closed-form coalition average") {
    // f(x) = x0 * x1 against the single background row (1, 1):
    // phi_0 = ((x0*1 - 1) + (x0*x1 - x1)) / 2, phi_1 symmetric
    const PredictFn product = [](const Eigen::MatrixXd& X) {
        return Eigen::VectorXd(X.col(0).cwiseProduct(X.col(1)));
    };
    Eigen::MatrixXd background(1, 2);
    background << 1.0, 1.0;
    Eigen::MatrixXd rows(1, 2);
    rows << 2.0, 3.0;
    const ShapleyReport report = shapley_importance(
        product, rows, background, ShapleyMethod::exact_enumeration, 0, 0);
    CHECK(report.values(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(report.values(0, 1) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(report.base_value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.predictions(0) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("permutation sampling approaches exact enumeration on a small ensemble") {
    // an 8-feature gradient-boosted model with signal on the first two features
    const int n = 400;
    Rng rng(2718);
    Eigen::MatrixXd X(n, 8);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 8; ++j) X(i, j) = rng.uniform(-1.0, 1.0);
        const double eta = 2.0 * X(i, 0) - 1.5 * X(i, 1) + 0.5 * X(i, 2);
        y(i) = rng.bernoulli(1.0 / (1.0 + std::exp(-eta))) ? 1.0 : 0.0;
    }
    GbdtConfig config;
    config.n_estimators = 25;
    config.max_depth = 2;
    config.learning_rate = 0.2;
    const GbdtModel model = fit_gbdt(X, y, config);
    const PredictFn predict = [&](const Eigen::MatrixXd& Q) {
        return model.predict_proba(Q);
    };

    const Eigen::MatrixXd background = X.topRows(50);
    const Eigen::MatrixXd explained = X.middleRows(50, 3);
    const ShapleyReport exact = shapley_importance(
        predict, explained, background, ShapleyMethod::exact_enumeration, 0, 0);
    const ShapleyReport sampled = shapley_importance(
        predict, explained, background, ShapleyMethod::permutation_sampling, 2000, 13);

    REQUIRE(sampled.mc_std_err.has_value());
    CHECK_FALSE(exact.mc_std_err.has_value());
    for (Eigen::Index i = 0; i < explained.rows(); ++i)
        for (Eigen::Index j = 0; j < 8; ++j) {
            CHECK(std::abs(exact.values(i, j) - sampled.values(i, j)) < 0.05);
            CHECK((*sampled.mc_std_err)(i, j) > 0.0);
            CHECK((*sampled.mc_std_err)(i, j) < 0.05);
        }
    check_efficiency(exact, 1e-9);
    check_efficiency(sampled, 1e-9);  // telescoping sums are exact per permutation
    CHECK(exact.base_value == sampled.base_value);

    // the signal features carry the largest mean absolute attribution
    const Eigen::VectorXd importance = exact.mean_abs();
    for (int j = 2; j < 8; ++j) {
        CHECK(importance(0) > importance(j));
        CHECK(importance(1) > importance(j));
    }
}

TEST_CASE("sampling error shrinks with more permutations") {
    const PredictFn model = [](const Eigen::MatrixXd& X) {
        return Eigen::VectorXd((X.col(0).array() * X.col(1).array() +
                                X.col(2).array().sin())
                                   .matrix());
    };
    const Eigen::MatrixXd background = random_matrix(30, 3, 8);
    const Eigen::MatrixXd rows = random_matrix(2, 3, 9);
    const ShapleyReport coarse = shapley_importance(
        model, rows, background, ShapleyMethod::permutation_sampling, 50, 1);
    const ShapleyReport fine = shapley_importance(
        model, rows, background, ShapleyMethod::permutation_sampling, 2000, 1);
    CHECK(coarse.mc_std_err->mean() > fine.mc_std_err->mean());
    const ShapleyReport exact = shapley_importance(
        model, rows, background, ShapleyMethod::exact_enumeration, 0, 0);
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) {
            const double gap = std::abs(fine.values(i, j) - exact.values(i, j));
            CHECK(gap < std::max(5.0 * (*fine.mc_std_err)(i, j), 1e-9));
        }
}

TEST_CASE("shapley attributions are seed-deterministic") {
    const PredictFn model = [](const Eigen::MatrixXd& X) {
        return Eigen::VectorXd(X.rowwise().prod());
    };
    const Eigen::MatrixXd background = random_matrix(15, 4, 10);
    const Eigen::MatrixXd rows = random_matrix(2, 4, 11);
    const ShapleyReport a = shapley_importance(
        model, rows, background, ShapleyMethod::permutation_sampling, 200, 42);
    const ShapleyReport b = shapley_importance(
        model, rows, background, ShapleyMethod::permutation_sampling, 200, 42);
    const ShapleyReport c = shapley_importance(
        model, rows, background, ShapleyMethod::permutation_sampling, 200, 43);
    CHECK((a.values.array() == b.values.array()).all());
    CHECK((a.mc_std_err->array() == b.mc_std_err->array()).all());
    CHECK((a.values.array() != c.values.array()).any());

    const ShapleyReport e1 = shapley_importance(
        model, rows, background, ShapleyMethod::exact_enumeration, 0, 42);
    const ShapleyReport e2 = shapley_importance(
        model, rows, background, ShapleyMethod::exact_enumeration, 0, 43);
    CHECK((e1.values.array() == e2.values.array()).all());  // exact ignores the seed
}

TEST_CASE("shapley reports name features and serialize per-case rows") {
    const PredictFn model = [](const Eigen::MatrixXd& X) {
        return Eigen::VectorXd(X.col(0) - X.col(1));
    };
    const Eigen::MatrixXd background = random_matrix(5, 2, 12);
    const Eigen::MatrixXd rows = random_matrix(2, 2, 13);
    const ShapleyReport unnamed = shapley_importance(
        model, rows, background, ShapleyMethod::exact_enumeration, 0, 0);
    CHECK(unnamed.feature_names == std::vector<std::string>{"x0", "x1"});
    const ShapleyReport named =
        shapley_importance(model, rows, background, ShapleyMethod::exact_enumeration,
                           0, 0, {"past_rate", "workload"});
    CHECK(named.feature_names == std::vector<std::string>{"past_rate", "workload"});
    const std::string csv = named.to_csv();
    CHECK(csv.find("row,prediction,base_value,past_rate,workload\n") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find("\n0,") != std::string::npos);
    CHECK(csv.find("\n1,") != std::string::npos);

    const Eigen::VectorXd importance = named.mean_abs();
    CHECK(importance(0) ==
          doctest::Approx(named.values.col(0).cwiseAbs().mean()).epsilon(1e-15));
}

TEST_CASE("shapley rejects unusable inputs") {
    const PredictFn model = [](const Eigen::MatrixXd& X) {
        return Eigen::VectorXd(X.rowwise().sum());
    };
    const Eigen::MatrixXd big_rows = random_matrix(1, 16, 1);
    const Eigen::MatrixXd big_background = random_matrix(4, 16, 2);
    CHECK_THROWS_AS(shapley_importance(model, big_rows, big_background,
                                       ShapleyMethod::exact_enumeration, 0, 0),
                    std::invalid_argument);
    // sampling mode still handles 16 features
    const ShapleyReport wide = shapley_importance(
        model, big_rows, big_background, ShapleyMethod::permutation_sampling, 10, 0);
    check_efficiency(wide, 1e-9);

    const Eigen::MatrixXd rows = random_matrix(2, 3, 3);
    const Eigen::MatrixXd background = random_matrix(4, 3, 4);
    CHECK_THROWS_AS(shapley_importance(model, Eigen::MatrixXd(0, 3), background,
                                       ShapleyMethod::exact_enumeration, 0, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(shapley_importance(model, rows, Eigen::MatrixXd(0, 3),
                                       ShapleyMethod::exact_enumeration, 0, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(shapley_importance(model, rows, random_matrix(4, 2, 5),
                                       ShapleyMethod::exact_enumeration, 0, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(shapley_importance(model, rows, background,
                                       ShapleyMethod::permutation_sampling, 0, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(shapley_importance(model, rows, background,
                                       ShapleyMethod::exact_enumeration, 0, 0,
                                       {"only_one"}),
                    std::invalid_argument);
}
