#include "courtaudit/qq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace courtaudit {

std::optional<double> pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson_r: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

QqResult qq_uniform(const std::vector<double>& pvalues) {
    for (double p : pvalues) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("qq_uniform: p-value outside [0, 1]");
    }
    QqResult r;
    const std::size_t K = pvalues.size();
    r.observed = pvalues;
    std::sort(r.observed.begin(), r.observed.end());
    r.expected.resize(K);
    for (std::size_t i = 0; i < K; ++i)
        r.expected[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(K);
    r.uniformity_r = pearson_r(r.expected, r.observed);
    return r;
}

}  // namespace courtaudit
