#pragma once

#include <vector>

namespace taskaug::xp {

// Two-sided Wilcoxon signed-rank test with Pratt zero handling: zero
// differences participate in the ranking (average ranks for ties) but are
// dropped from the statistic. For up to kExactLimit nonzero differences the
// p-value is exact, p = min(1, 2*min(P(W+ <= w), P(W+ >= w))) under sign
// enumeration; beyond that a normal approximation with continuity correction
// is used. All differences zero gives p = 1.
struct WilcoxonResult {
    double w_plus = 0.0;
    double w_minus = 0.0;
    int n_nonzero = 0;
    double p_value = 1.0;
    bool exact = true;
};

inline constexpr int kExactLimit = 20;

WilcoxonResult wilcoxon_signed_rank_diffs(const std::vector<double>& diffs);
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace taskaug::xp
