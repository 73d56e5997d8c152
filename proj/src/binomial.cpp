#include "courtaudit/binomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace courtaudit {

namespace {

constexpr double kTieRelTol = 1e-12;

void check_args(std::int64_t k, std::int64_t n, double p0) {
    if (n < 1) throw std::invalid_argument("binomial: n must be >= 1");
    if (k < 0 || k > n)
        throw std::invalid_argument("binomial: k=" + std::to_string(k) +
                                    " outside [0, n=" + std::to_string(n) + "]");
    if (!(p0 > 0.0 && p0 < 1.0))
        throw std::invalid_argument("binomial: p0 must be strictly inside (0, 1)");
}

}  // namespace

double binomial_log_pmf(std::int64_t k, std::int64_t n, double p) {
    const double dk = static_cast<double>(k);
    const double dn = static_cast<double>(n);
    return std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0) +
           dk * std::log(p) + (dn - dk) * std::log1p(-p);
}

double binomial_pmf(std::int64_t k, std::int64_t n, double p) {
    return std::exp(binomial_log_pmf(k, n, p));
}

double binomial_two_sided(std::int64_t k, std::int64_t n, double p0) {
    check_args(k, n, p0);
    const double log_pmf_k = binomial_log_pmf(k, n, p0);
    // log-space tie threshold: include i when pmf(i) <= pmf(k) * (1 + tol)
    const double threshold = log_pmf_k + std::log1p(kTieRelTol);
    double total = 0.0;
    for (std::int64_t i = 0; i <= n; ++i) {
        const double log_pmf_i = binomial_log_pmf(i, n, p0);
        if (log_pmf_i <= threshold) total += std::exp(log_pmf_i);
    }
    return std::min(total, 1.0);
}

double binomial_upper_tail(std::int64_t k, std::int64_t n, double p) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    // Sum the smaller side when possible to limit cancellation.
    double total = 0.0;
    for (std::int64_t i = k; i <= n; ++i) total += binomial_pmf(i, n, p);
    return std::min(total, 1.0);
}

double binomial_lower_tail(std::int64_t k, std::int64_t n, double p) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    double total = 0.0;
    for (std::int64_t i = 0; i <= k; ++i) total += binomial_pmf(i, n, p);
    return std::min(total, 1.0);
}

BinomialBounds binomial_central_bounds(std::int64_t n, double level) {
    if (n < 1) throw std::invalid_argument("binomial_central_bounds: n must be >= 1");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("binomial_central_bounds: level must be inside (0, 1)");
    const double tail = (1.0 - level) / 2.0;
    std::int64_t k_over = n + 1;  // may be unreachable for tiny n
    for (std::int64_t k = n; k >= 0; --k) {
        if (binomial_upper_tail(k, n, 0.5) <= tail)
            k_over = k;
        else
            break;
    }
    std::int64_t k_under = -1;
    for (std::int64_t k = 0; k <= n; ++k) {
        if (binomial_lower_tail(k, n, 0.5) <= tail)
            k_under = k;
        else
            break;
    }
    return {k_under, k_over};
}

}  // namespace courtaudit
