#pragma once

#include <cmath>
#include <cstdint>

namespace taskaug::seg::detail {

// Mean over pixels of -sum_c w_c * t_c * log softmax_c(logits). Soft targets
// allowed. Optional gradients:
//   d/dlogit_k  = (p_k * sum_c w_c t_c - w_k t_k) / P
//   d/dtarget_k = (-w_k * log p_k) / P
// (accumulated into the provided buffers).
template <typename T>
T weighted_ce(const T* logits, const T* target, const T* weights, std::int64_t pixels, int classes,
              T* d_logits = nullptr, T* d_target = nullptr) {
    T total = T(0);
    const T inv_p = T(1) / static_cast<T>(pixels);
    for (std::int64_t p = 0; p < pixels; ++p) {
        const T* z = logits + p * classes;
        const T* t = target + p * classes;
        T zmax = z[0];
        for (int c = 1; c < classes; ++c) zmax = z[c] > zmax ? z[c] : zmax;
        T sum_exp = T(0);
        for (int c = 0; c < classes; ++c) sum_exp += std::exp(z[c] - zmax);
        const T log_sum = std::log(sum_exp);

        T wt_dot = T(0);  // sum_c w_c t_c
        for (int c = 0; c < classes; ++c) {
            const T logp = z[c] - zmax - log_sum;
            total -= weights[c] * t[c] * logp;
            wt_dot += weights[c] * t[c];
            if (d_target) d_target[p * classes + c] += -weights[c] * logp * inv_p;
        }
        if (d_logits) {
            for (int c = 0; c < classes; ++c) {
                const T prob = std::exp(z[c] - zmax - log_sum);
                d_logits[p * classes + c] += (prob * wt_dot - weights[c] * t[c]) * inv_p;
            }
        }
    }
    return total * inv_p;
}

}  // namespace taskaug::seg::detail
