#pragma once

#include <cstdint>

namespace courtaudit {

// log of the Binomial(n, p) pmf at k, computed via lgamma so it stays finite
// for n in the thousands.
double binomial_log_pmf(std::int64_t k, std::int64_t n, double p);

double binomial_pmf(std::int64_t k, std::int64_t n, double p);

// Exact two-sided binomial p-value by the minimum-likelihood rule: the sum of
// Binomial(n, p0) probabilities over all outcomes i whose pmf does not exceed
// pmf(k). Ties in the pmf are compared with relative tolerance 1e-12.
// Requires 0 <= k <= n, n >= 1 and p0 strictly inside (0, 1).
double binomial_two_sided(std::int64_t k, std::int64_t n, double p0);

// Upper tail P(X >= k) and lower tail P(X <= k) for X ~ Binomial(n, p).
double binomial_upper_tail(std::int64_t k, std::int64_t n, double p);
double binomial_lower_tail(std::int64_t k, std::int64_t n, double p);

// Equal-tailed bounds of the central confidence interval under
// Binomial(n, 0.5): k_over is the smallest count with upper tail
// <= (1-level)/2, k_under the largest count with lower tail <= (1-level)/2.
// A count >= k_over falls above the interval, a count <= k_under below.
struct BinomialBounds {
    std::int64_t k_under;
    std::int64_t k_over;
};
BinomialBounds binomial_central_bounds(std::int64_t n, double level);

}  // namespace courtaudit
