#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "courtaudit/binomial.hpp"

using namespace courtaudit;

namespace {

// Independent check implementation: pmf table by the multiplicative
// recurrence (no lgamma), then the same minimum-likelihood summation.
double two_sided_by_recurrence(std::int64_t k, std::int64_t n, double p) {
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
    pmf[0] = std::pow(1.0 - p, static_cast<double>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        pmf[static_cast<std::size_t>(i) + 1] = pmf[static_cast<std::size_t>(i)] *
                                               static_cast<double>(n - i) /
                                               static_cast<double>(i + 1) * p / (1.0 - p);
    }
    const double threshold = pmf[static_cast<std::size_t>(k)] * (1.0 + 1e-12);
    double total = 0.0;
    for (double v : pmf)
        if (v <= threshold) total += v;
    return std::min(total, 1.0);
}

}  // namespace

TEST_CASE("pmf values") {
    CHECK(binomial_pmf(3, 10, 0.3) == doctest::Approx(0.26682793199999977).epsilon(1e-12));
    CHECK(binomial_pmf(0, 10, 0.5) == doctest::Approx(std::pow(0.5, 10)).epsilon(1e-12));
    CHECK(binomial_log_pmf(500, 2000, 0.25) ==
          doctest::Approx(-3.882582101720402).epsilon(1e-10));
    // stays finite far into the tail where the plain pmf underflows
    CHECK(std::isfinite(binomial_log_pmf(0, 5000, 0.5)));
}

TEST_CASE("two sided p-values match reference values") {
    CHECK(binomial_two_sided(70, 100, 0.4) ==
          doctest::Approx(1.910762652405463e-09).epsilon(1e-9));
    CHECK(binomial_two_sided(45, 100, 0.4) ==
          doctest::Approx(0.30923816163410833).epsilon(1e-12));
    CHECK(binomial_two_sided(10, 10, 0.5) == doctest::Approx(0.001953125).epsilon(1e-12));
    CHECK(binomial_two_sided(0, 10, 0.5) == doctest::Approx(0.001953125).epsilon(1e-12));
    CHECK(binomial_two_sided(107, 158, 0.25) ==
          doctest::Approx(1.8632903566418977e-29).epsilon(1e-9));
    CHECK(binomial_two_sided(20, 330, 0.25) ==
          doctest::Approx(2.0855024439087455e-19).epsilon(1e-9));
    CHECK(binomial_two_sided(1, 4, 0.25) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(binomial_two_sided(3, 7, 0.3) == doctest::Approx(0.43528479999999997).epsilon(1e-12));
    CHECK(binomial_two_sided(250, 1000, 0.25) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(binomial_two_sided(58, 200, 0.25) ==
          doctest::Approx(0.19187879451029843).epsilon(1e-12));
}

TEST_CASE("two sided agrees with the recurrence implementation") {
    for (std::int64_t n : {7, 25, 64, 150, 330}) {
        for (double p : {0.1, 0.25, 0.4, 0.5, 0.77}) {
            for (std::int64_t k = 0; k <= n; k += std::max<std::int64_t>(1, n / 13)) {
                const double mine = binomial_two_sided(k, n, p);
                const double ref = two_sided_by_recurrence(k, n, p);
                CHECK(mine == doctest::Approx(ref).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("two sided basic properties") {
    // valid probability, symmetric under p0 = 0.5
    for (std::int64_t k = 0; k <= 30; ++k) {
        const double p = binomial_two_sided(k, 30, 0.5);
        CHECK(p > 0.0);
        CHECK(p <= 1.0);
        CHECK(p == doctest::Approx(binomial_two_sided(30 - k, 30, 0.5)).epsilon(1e-12));
    }
    // moving away from the mode can only shrink the p-value
    double prev = binomial_two_sided(15, 30, 0.5);
    for (std::int64_t k = 16; k <= 30; ++k) {
        const double cur = binomial_two_sided(k, 30, 0.5);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("two sided argument validation") {
    CHECK_THROWS_AS(binomial_two_sided(-1, 10, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(binomial_two_sided(11, 10, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(binomial_two_sided(0, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(binomial_two_sided(5, 10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(binomial_two_sided(5, 10, 1.0), std::invalid_argument);
}

TEST_CASE("tail probabilities") {
    CHECK(binomial_upper_tail(5, 20, 0.25) ==
          doctest::Approx(0.5851584974698198).epsilon(1e-12));
    CHECK(binomial_lower_tail(5, 20, 0.25) ==
          doctest::Approx(0.6171726543871046).epsilon(1e-12));
    CHECK(binomial_upper_tail(0, 20, 0.25) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(binomial_lower_tail(20, 20, 0.25) == doctest::Approx(1.0).epsilon(1e-12));
    // complements: P(X >= k) + P(X <= k-1) = 1
    for (std::int64_t k = 1; k <= 20; ++k) {
        CHECK(binomial_upper_tail(k, 20, 0.3) + binomial_lower_tail(k - 1, 20, 0.3) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("central interval bounds for a fair coin") {
    const auto b = binomial_central_bounds(50, 0.90);
    CHECK(b.k_over == 32);   // P(X >= 32) = 0.0325 <= 0.05 < 0.0595 = P(X >= 31)
    CHECK(b.k_under == 18);  // mirror image
    CHECK(binomial_upper_tail(b.k_over, 50, 0.5) ==
          doctest::Approx(0.03245432353613609).epsilon(1e-12));
    CHECK(binomial_upper_tail(b.k_over - 1, 50, 0.5) > 0.05);
    CHECK(binomial_lower_tail(b.k_under, 50, 0.5) ==
          doctest::Approx(0.03245432353613609).epsilon(1e-12));
    CHECK(binomial_lower_tail(b.k_under + 1, 50, 0.5) > 0.05);

    // symmetry of the fair-coin interval for a spread of sizes
    for (std::int64_t n : {50, 51, 200, 333}) {
        const auto bounds = binomial_central_bounds(n, 0.90);
        CHECK(bounds.k_over + bounds.k_under == n);
        CHECK(bounds.k_under < bounds.k_over);
    }
}
