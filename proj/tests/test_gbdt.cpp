#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "courtaudit/gbdt.hpp"
#include "courtaudit/rng.hpp"
#include "courtaudit/text_io.hpp"

using namespace courtaudit;

namespace {

struct XorData {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

XorData make_xor(int n, std::uint64_t seed) {
    XorData data;
    data.X.resize(n, 2);
    data.y.resize(n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        data.X(i, 0) = rng.uniform(-1.0, 1.0);
        data.X(i, 1) = rng.uniform(-1.0, 1.0);
        data.y(i) = ((data.X(i, 0) > 0.0) != (data.X(i, 1) > 0.0)) ? 1.0 : 0.0;
    }
    return data;
}

double balanced_accuracy(const Eigen::VectorXd& prob, const Eigen::VectorXd& y) {
    double hit1 = 0, n1 = 0, hit0 = 0, n0 = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const bool predicted = prob(i) > 0.5;
        if (y(i) == 1.0) {
            ++n1;
            if (predicted) ++hit1;
        } else {
            ++n0;
            if (!predicted) ++hit0;
        }
    }
    return 0.5 * (hit1 / n1 + hit0 / n0);
}

}  // namespace

TEST_CASE("hand built two tree ensembles predict by summed leaves") {
    GbdtModel model;
    model.config.learning_rate = 0.1;
    model.base_score = 0.3;
    model.feature_names = {"f0", "f1"};

    Tree first;  // split on f0 at 0.5
    first.nodes.resize(3);
    first.nodes[0].feature = 0;
    first.nodes[0].threshold = 0.5;
    first.nodes[0].left = 1;
    first.nodes[0].right = 2;
    first.nodes[1].value = 1.0;
    first.nodes[2].value = 2.0;

    Tree second;  // split on f1 at -0.2
    second.nodes.resize(3);
    second.nodes[0].feature = 1;
    second.nodes[0].threshold = -0.2;
    second.nodes[0].left = 1;
    second.nodes[0].right = 2;
    second.nodes[1].value = 0.5;
    second.nodes[2].value = -0.25;

    model.trees = {first, second};

    Eigen::MatrixXd X(3, 2);
    X << 0.2, 0.1,    // left then right: 1.0 - 0.25
         0.5, -0.2,   // boundary values go left: 1.0 + 0.5
         0.6, -0.3;   // right then left: 2.0 + 0.5
    const Eigen::VectorXd f = model.decision_function(X);
    CHECK(f(0) == doctest::Approx(0.3 + 0.1 * 0.75).epsilon(1e-15));
    CHECK(f(1) == doctest::Approx(0.3 + 0.1 * 1.5).epsilon(1e-15));
    CHECK(f(2) == doctest::Approx(0.3 + 0.1 * 2.5).epsilon(1e-15));
    const Eigen::VectorXd p = model.predict_proba(X);
    for (int i = 0; i < 3; ++i)
        CHECK(p(i) == doctest::Approx(1.0 / (1.0 + std::exp(-f(i)))).epsilon(1e-15));
}

TEST_CASE("xor patterns are learned") {
    const XorData train = make_xor(800, 31);
    const XorData test = make_xor(400, 32);
    GbdtConfig config;
    config.n_estimators = 100;
    config.max_depth = 2;
    config.learning_rate = 0.2;
    const GbdtModel model = fit_gbdt(train.X, train.y, config, {"a", "b"});
    CHECK(balanced_accuracy(model.predict_proba(test.X), test.y) >= 0.9);

    // training loss declines as stages accumulate
    REQUIRE(model.training_loss.size() == 101);
    for (std::size_t i = 1; i < model.training_loss.size(); ++i)
        CHECK(model.training_loss[i] <= model.training_loss[i - 1] + 1e-12);
    CHECK(model.training_loss.back() < 0.5 * model.training_loss.front());
}

TEST_CASE("shuffled labels stay at chance") {
    const XorData train = make_xor(400, 41);
    const XorData test = make_xor(200, 42);
    GbdtConfig config;
    config.n_estimators = 40;
    config.max_depth = 2;
    config.learning_rate = 0.1;

    Rng rng(77);
    double total = 0.0;
    const int n_shuffles = 20;
    for (int s = 0; s < n_shuffles; ++s) {
        std::vector<double> labels(train.y.data(), train.y.data() + train.y.size());
        rng.shuffle(labels);
        Eigen::VectorXd shuffled =
            Eigen::Map<Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()));
        const GbdtModel model = fit_gbdt(train.X, shuffled, config);
        total += balanced_accuracy(model.predict_proba(test.X), test.y);
    }
    const double mean = total / n_shuffles;
    CHECK(mean >= 0.45);
    CHECK(mean <= 0.55);
}

TEST_CASE("constant features fall back to the prevalence") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(100, 1);
    Eigen::VectorXd y(100);
    for (int i = 0; i < 100; ++i) y(i) = i < 40 ? 1.0 : 0.0;
    GbdtConfig config;
    config.n_estimators = 10;
    const GbdtModel model = fit_gbdt(X, y, config);
    const Eigen::VectorXd p = model.predict_proba(X);
    for (int i = 0; i < 100; ++i) CHECK(p(i) == doctest::Approx(0.4).epsilon(1e-12));
    // every tree is a bare leaf contributing nothing beyond rounding noise
    for (const auto& tree : model.trees) {
        REQUIRE(tree.nodes.size() == 1);
        CHECK(std::abs(tree.nodes[0].value) < 1e-12);
    }

    Eigen::VectorXd balanced(100);
    for (int i = 0; i < 100; ++i) balanced(i) = i % 2 == 0 ? 1.0 : 0.0;
    const GbdtModel coin = fit_gbdt(X, balanced, config);
    CHECK(coin.predict_proba(X)(0) == 0.5);
}

TEST_CASE("shorter fits are prefixes of longer ones") {
    const XorData train = make_xor(300, 51);
    GbdtConfig config;
    config.max_depth = 3;
    config.learning_rate = 0.1;
    config.n_estimators = 10;
    const GbdtModel short_fit = fit_gbdt(train.X, train.y, config);
    config.n_estimators = 30;
    const GbdtModel long_fit = fit_gbdt(train.X, train.y, config);

    REQUIRE(short_fit.trees.size() == 10);
    REQUIRE(long_fit.trees.size() == 30);
    CHECK(short_fit.base_score == long_fit.base_score);
    for (std::size_t m = 0; m < 10; ++m) {
        const auto& a = short_fit.trees[m].nodes;
        const auto& b = long_fit.trees[m].nodes;
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].feature == b[i].feature);
            CHECK(a[i].threshold == b[i].threshold);
            CHECK(a[i].value == b[i].value);
        }
    }
    for (std::size_t i = 0; i < short_fit.training_loss.size(); ++i)
        CHECK(short_fit.training_loss[i] == long_fit.training_loss[i]);
}

TEST_CASE("every leaf keeps the minimum row support") {
    const XorData train = make_xor(500, 61);
    GbdtConfig config;
    config.n_estimators = 20;
    config.max_depth = 4;
    config.min_leaf = 20;
    const GbdtModel model = fit_gbdt(train.X, train.y, config);
    for (const auto& tree : model.trees) {
        std::map<int, int> leaf_counts;
        for (Eigen::Index r = 0; r < train.X.rows(); ++r) {
            int node = 0;
            while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
                const auto& n = tree.nodes[static_cast<std::size_t>(node)];
                node = train.X(r, n.feature) <= n.threshold ? n.left : n.right;
            }
            ++leaf_counts[node];
        }
        for (const auto& [node, count] : leaf_counts) CHECK(count >= 20);
    }
}

TEST_CASE("cross validation searches the grid and refits") {
    const XorData train = make_xor(600, 71);
    GbdtCvConfig cv;
    cv.seed = 5;
    const GbdtCvResult result = fit_gbdt_cv(train.X, train.y, cv, {"a", "b"});

    CHECK(result.table.size() == 27);
    double best_seen = -1.0;
    for (const auto& cell : result.table) {
        CHECK(cell.mean_accuracy >= 0.0);
        CHECK(cell.mean_accuracy <= 1.0);
        best_seen = std::max(best_seen, cell.mean_accuracy);
    }
    CHECK(result.best_accuracy == best_seen);
    CHECK(result.best_accuracy > 0.9);  // xor is learnable at depth >= 2
    CHECK(result.model.config.n_estimators == result.best_config.n_estimators);
    CHECK(result.model.config.max_depth == result.best_config.max_depth);
    CHECK(result.model.config.learning_rate == result.best_config.learning_rate);
    CHECK(result.model.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(result.model.trees.size() ==
          static_cast<std::size_t>(result.best_config.n_estimators));

    const GbdtCvResult again = fit_gbdt_cv(train.X, train.y, cv, {"a", "b"});
    CHECK(again.best_accuracy == result.best_accuracy);
    CHECK(again.best_config.n_estimators == result.best_config.n_estimators);
    CHECK(again.best_config.max_depth == result.best_config.max_depth);
    CHECK(again.best_config.learning_rate == result.best_config.learning_rate);
    for (std::size_t i = 0; i < result.table.size(); ++i)
        CHECK(again.table[i].mean_accuracy == result.table[i].mean_accuracy);
}

TEST_CASE("grid ties break toward the simplest model") {
    // a constant feature gives every grid point identical accuracy
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(120, 1);
    Eigen::VectorXd y(120);
    for (int i = 0; i < 120; ++i) y(i) = i % 2 == 0 ? 1.0 : 0.0;
    GbdtCvConfig cv;
    cv.seed = 1;
    const GbdtCvResult result = fit_gbdt_cv(X, y, cv);
    CHECK(result.best_config.n_estimators == 25);
    CHECK(result.best_config.max_depth == 2);
    CHECK(result.best_config.learning_rate == 0.01);
}

TEST_CASE("degenerate folds and empty grids are rejected") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(12, 1);
    Eigen::VectorXd one_win = Eigen::VectorXd::Zero(12);
    one_win(3) = 1.0;
    GbdtCvConfig cv;
    CHECK_THROWS_AS(fit_gbdt_cv(X, one_win, cv), std::invalid_argument);

    Eigen::VectorXd y(12);
    for (int i = 0; i < 12; ++i) y(i) = i % 2 == 0 ? 1.0 : 0.0;
    GbdtCvConfig empty = cv;
    empty.n_estimators_grid.clear();
    CHECK_THROWS_AS(fit_gbdt_cv(X, y, empty), std::invalid_argument);
    GbdtCvConfig folds = cv;
    folds.folds = 1;
    CHECK_THROWS_AS(fit_gbdt_cv(X, y, folds), std::invalid_argument);
}

TEST_CASE("invalid boosting inputs are rejected") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(10, 1);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) y(i) = i % 2 == 0 ? 1.0 : 0.0;
    GbdtConfig config;
    config.n_estimators = 0;
    CHECK_THROWS_AS(fit_gbdt(X, y, config), std::invalid_argument);
    config = GbdtConfig{};
    CHECK_THROWS_AS(fit_gbdt(X, Eigen::VectorXd::Ones(10), config),
                    std::invalid_argument);
    Eigen::VectorXd bad = y;
    bad(0) = 0.25;
    CHECK_THROWS_AS(fit_gbdt(X, bad, config), std::invalid_argument);
    CHECK_THROWS_AS(fit_gbdt(X, y, config, {"a", "b"}), std::invalid_argument);
}

TEST_CASE("models round trip through json") {
    const XorData train = make_xor(200, 81);
    GbdtConfig config;
    config.n_estimators = 5;
    config.max_depth = 2;
    const GbdtModel model = fit_gbdt(train.X, train.y, config, {"left", "right"});

    const auto dir = std::filesystem::temp_directory_path() / "courtaudit_test_gbdt";
    std::filesystem::create_directories(dir);
    const auto path = dir / "model.json";
    model.save(path);
    const GbdtModel back = GbdtModel::load(path);

    CHECK(back.base_score == model.base_score);
    CHECK(back.feature_names == model.feature_names);
    CHECK(back.config.learning_rate == model.config.learning_rate);
    CHECK(back.training_loss == model.training_loss);
    REQUIRE(back.trees.size() == model.trees.size());
    const Eigen::VectorXd before = model.predict_proba(train.X);
    const Eigen::VectorXd after = back.predict_proba(train.X);
    CHECK((before - after).cwiseAbs().maxCoeff() == 0.0);

    const auto path2 = dir / "model2.json";
    back.save(path2);
    CHECK(read_file(path) == read_file(path2));
}
