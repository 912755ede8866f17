#include "taskaug/seg/losses.hpp"

#include <vector>

#include "taskaug/core/errors.hpp"
#include "taskaug/seg/wce_kernel.hpp"

namespace taskaug::seg {

namespace {

constexpr int kC = data::kNumClasses;

std::array<double, kC> effective_weights(const ClassWeights& weights, bool include_background) {
    std::array<double, kC> w{};
    for (int c = 0; c < kC; ++c) w[static_cast<size_t>(c)] = weights.w[static_cast<size_t>(c)];
    if (!include_background) w[0] = 0.0;
    return w;
}

}  // namespace

double weighted_cross_entropy(const Tensor& logits, const Tensor& target_onehot,
                              const ClassWeights& weights, bool include_background) {
    if (!logits.same_shape(target_onehot) || logits.dim(logits.rank() - 1) != kC)
        throw ShapeMismatch("weighted_cross_entropy inputs");
    const std::int64_t pixels = logits.size() / kC;
    const auto w = effective_weights(weights, include_background);
    std::vector<double> z(static_cast<size_t>(logits.size())), t(static_cast<size_t>(logits.size()));
    for (std::int64_t i = 0; i < logits.size(); ++i) {
        z[static_cast<size_t>(i)] = logits[i];
        t[static_cast<size_t>(i)] = target_onehot[i];
    }
    return detail::weighted_ce<double>(z.data(), t.data(), w.data(), pixels, kC);
}

Tensor weighted_cross_entropy_backward(const Tensor& logits, const Tensor& target_onehot,
                                       const ClassWeights& weights, bool include_background,
                                       Tensor* d_target) {
    if (!logits.same_shape(target_onehot) || logits.dim(logits.rank() - 1) != kC)
        throw ShapeMismatch("weighted_cross_entropy inputs");
    const std::int64_t pixels = logits.size() / kC;
    const auto w = effective_weights(weights, include_background);
    std::vector<double> z(static_cast<size_t>(logits.size())), t(static_cast<size_t>(logits.size()));
    for (std::int64_t i = 0; i < logits.size(); ++i) {
        z[static_cast<size_t>(i)] = logits[i];
        t[static_cast<size_t>(i)] = target_onehot[i];
    }
    std::vector<double> dz(static_cast<size_t>(logits.size()), 0.0);
    std::vector<double> dt;
    if (d_target) dt.assign(static_cast<size_t>(logits.size()), 0.0);
    detail::weighted_ce<double>(z.data(), t.data(), w.data(), pixels, kC, dz.data(),
                                d_target ? dt.data() : nullptr);
    Tensor out(logits.shape());
    for (std::int64_t i = 0; i < logits.size(); ++i)
        out[i] = static_cast<float>(dz[static_cast<size_t>(i)]);
    if (d_target) {
        *d_target = Tensor(logits.shape());
        for (std::int64_t i = 0; i < logits.size(); ++i)
            (*d_target)[i] = static_cast<float>(dt[static_cast<size_t>(i)]);
    }
    return out;
}

Tensor argmax_labels(const Tensor& logits_hw4) {
    if (logits_hw4.rank() != 3 || logits_hw4.dim(2) != kC)
        throw ShapeMismatch("argmax_labels expects (H,W,4)");
    Tensor out({logits_hw4.dim(0), logits_hw4.dim(1)});
    const std::int64_t pixels = out.size();
    for (std::int64_t p = 0; p < pixels; ++p) {
        const float* z = logits_hw4.data() + p * kC;
        int best = 0;
        for (int c = 1; c < kC; ++c)
            if (z[c] > z[best]) best = c;
        out[p] = static_cast<float>(best);
    }
    return out;
}

}  // namespace taskaug::seg
