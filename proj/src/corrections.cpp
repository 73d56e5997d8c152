#include "courtaudit/corrections.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace courtaudit {

Correction correction_from_string(const std::string& s) {
    if (s == "bonferroni" || s == "bf") return Correction::bonferroni;
    if (s == "benjamini_hochberg" || s == "bh") return Correction::benjamini_hochberg;
    if (s == "benjamini_yekutieli" || s == "by") return Correction::benjamini_yekutieli;
    throw std::invalid_argument("unknown correction method: '" + s + "'");
}

std::string to_string(Correction c) {
    switch (c) {
        case Correction::bonferroni: return "bonferroni";
        case Correction::benjamini_hochberg: return "benjamini_hochberg";
        case Correction::benjamini_yekutieli: return "benjamini_yekutieli";
    }
    return "?";
}

double harmonic_number(std::size_t k) {
    double h = 0.0;
    for (std::size_t i = 1; i <= k; ++i) h += 1.0 / static_cast<double>(i);
    return h;
}

CorrectionResult correct_pvalues(const std::vector<double>& ps, Correction method, double alpha) {
    if (ps.empty()) throw std::invalid_argument("correct_pvalues: empty input");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("correct_pvalues: alpha must be inside (0, 1)");
    for (double p : ps) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("correct_pvalues: p-value outside [0, 1]");
    }

    const std::size_t K = ps.size();
    const double dK = static_cast<double>(K);
    CorrectionResult result;
    result.adjusted.resize(K);
    result.reject.resize(K);

    if (method == Correction::bonferroni) {
        for (std::size_t i = 0; i < K; ++i) {
            result.adjusted[i] = std::min(1.0, ps[i] * dK);
            result.reject[i] = result.adjusted[i] <= alpha;
        }
    } else {
        const double factor =
            method == Correction::benjamini_yekutieli ? harmonic_number(K) : 1.0;

        // rank order (stable, so tied p-values keep input order)
        std::vector<std::size_t> order(K);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&ps](std::size_t a, std::size_t b) { return ps[a] < ps[b]; });

        // step-up adjusted values: adj_(i) = min_{j >= i} min(1, K*factor*p_(j)/j)
        std::vector<double> adjusted_sorted(K);
        double running = 1.0;
        for (std::size_t i = K; i-- > 0;) {
            const double rank = static_cast<double>(i + 1);
            running = std::min(running, std::min(1.0, ps[order[i]] * dK * factor / rank));
            adjusted_sorted[i] = running;
        }

        // largest rank whose raw p is at or below its step-up threshold
        std::size_t cutoff_rank = 0;
        for (std::size_t i = K; i-- > 0;) {
            const double rank = static_cast<double>(i + 1);
            if (ps[order[i]] <= rank * alpha / (dK * factor)) {
                cutoff_rank = i + 1;
                break;
            }
        }
        for (std::size_t i = 0; i < K; ++i) {
            result.adjusted[order[i]] = adjusted_sorted[i];
            result.reject[order[i]] = (i + 1) <= cutoff_rank;
        }
    }

    result.n_rejected =
        static_cast<std::size_t>(std::count(result.reject.begin(), result.reject.end(), true));
    return result;
}

}  // namespace courtaudit
