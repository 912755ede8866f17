#include "taskaug/xp/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "taskaug/core/errors.hpp"

namespace taskaug::xp {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank_diffs(const std::vector<double>& diffs) {
    const int n = static_cast<int>(diffs.size());
    if (n == 0) throw std::invalid_argument("wilcoxon needs at least one pair");

    // Average ranks of |d| over ALL pairs, zeros included (Pratt).
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return std::abs(diffs[static_cast<size_t>(i)]) < std::abs(diffs[static_cast<size_t>(j)]);
    });
    std::vector<double> rank(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n;) {
        int j = i;
        while (j < n && std::abs(diffs[static_cast<size_t>(order[static_cast<size_t>(j)])]) ==
                            std::abs(diffs[static_cast<size_t>(order[static_cast<size_t>(i)])]))
            ++j;
        const double avg = (static_cast<double>(i) + j + 1.0) / 2.0;  // 1-based average rank
        for (int k = i; k < j; ++k) rank[static_cast<size_t>(order[static_cast<size_t>(k)])] = avg;
        i = j;
    }

    WilcoxonResult res;
    std::vector<double> nonzero_ranks;
    for (int i = 0; i < n; ++i) {
        const double d = diffs[static_cast<size_t>(i)];
        if (d > 0) res.w_plus += rank[static_cast<size_t>(i)];
        else if (d < 0) res.w_minus += rank[static_cast<size_t>(i)];
        if (d != 0) nonzero_ranks.push_back(rank[static_cast<size_t>(i)]);
    }
    res.n_nonzero = static_cast<int>(nonzero_ranks.size());
    if (res.n_nonzero == 0) {
        res.p_value = 1.0;
        res.exact = true;
        return res;
    }

    if (res.n_nonzero <= kExactLimit) {
        // Ranks are multiples of 1/2; doubled they are exact integers.
        std::vector<long long> r2(nonzero_ranks.size());
        for (size_t i = 0; i < nonzero_ranks.size(); ++i)
            r2[i] = static_cast<long long>(std::llround(2.0 * nonzero_ranks[i]));
        const long long w2 = static_cast<long long>(std::llround(2.0 * res.w_plus));
        const std::uint64_t total = 1ULL << res.n_nonzero;
        std::uint64_t count_le = 0, count_ge = 0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            long long w = 0;
            std::uint64_t m = mask;
            for (size_t i = 0; m != 0; ++i, m >>= 1)
                if (m & 1ULL) w += r2[i];
            count_le += w <= w2;
            count_ge += w >= w2;
        }
        const double p = 2.0 * static_cast<double>(std::min(count_le, count_ge)) /
                         static_cast<double>(total);
        res.p_value = std::min(1.0, p);
        res.exact = true;
        return res;
    }

    // Normal approximation: W+ = sum r_i * B_i, B_i ~ Bernoulli(1/2); the
    // observed average ranks absorb the tie correction.
    double mean = 0.0, var = 0.0;
    for (double r : nonzero_ranks) {
        mean += r / 2.0;
        var += r * r / 4.0;
    }
    const double sd = std::sqrt(var);
    if (sd == 0.0) {
        res.p_value = 1.0;
    } else if (res.w_plus > mean) {
        res.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf((res.w_plus - 0.5 - mean) / sd)));
    } else if (res.w_plus < mean) {
        res.p_value = std::min(1.0, 2.0 * normal_cdf((res.w_plus + 0.5 - mean) / sd));
    } else {
        res.p_value = 1.0;
    }
    res.exact = false;
    return res;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw UnpairedRuns("paired samples differ in length");
    std::vector<double> diffs(a.size());
    for (size_t i = 0; i < a.size(); ++i) diffs[i] = a[i] - b[i];
    return wilcoxon_signed_rank_diffs(diffs);
}

}  // namespace taskaug::xp
