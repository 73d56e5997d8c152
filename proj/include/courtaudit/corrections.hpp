#pragma once

#include <string>
#include <vector>

namespace courtaudit {

enum class Correction {
    bonferroni,
    benjamini_hochberg,
    benjamini_yekutieli,
};

Correction correction_from_string(const std::string& s);
std::string to_string(Correction c);

struct CorrectionResult {
    std::vector<double> adjusted;  // monotone adjusted p-values, input order
    std::vector<bool> reject;      // rejection flags at alpha, input order
    std::size_t n_rejected = 0;
};

// Multiple-testing correction over raw p-values.
//   bonferroni          reject iff p <= alpha / K
//   benjamini_hochberg  step-up with thresholds i * alpha / K
//   benjamini_yekutieli step-up with thresholds i * alpha / (K * H(K)),
//                       H(K) the K-th harmonic number
// Adjusted p-values are the standard monotone adjustments: rejection at
// alpha is equivalent to adjusted <= alpha. Throws on empty input, p outside
// [0, 1], or alpha outside (0, 1).
CorrectionResult correct_pvalues(const std::vector<double>& ps, Correction method, double alpha);

double harmonic_number(std::size_t k);

}  // namespace courtaudit
