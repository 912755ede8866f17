#include "taskaug/gan/losses.hpp"

#include <cmath>

#include "taskaug/core/errors.hpp"

namespace taskaug::gan {

namespace {

struct TwoProbs {
    double p0, p1;
};

TwoProbs softmax2(const float* z) {
    const double m = std::max(z[0], z[1]);
    const double e0 = std::exp(static_cast<double>(z[0]) - m);
    const double e1 = std::exp(static_cast<double>(z[1]) - m);
    const double s = e0 + e1;
    return {e0 / s, e1 / s};
}

void check_logits(const Tensor& logits) {
    if (logits.rank() != 2 || logits.dim(1) != 2)
        throw ShapeMismatch("discriminator logits must be (N,2)");
}

// mean over rows of -log max(p_target, floor)
double nll(const Tensor& logits, int target) {
    check_logits(logits);
    const int n = logits.dim(0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const TwoProbs p = softmax2(logits.data() + 2 * i);
        const double pt = target == 0 ? p.p0 : p.p1;
        total -= std::log(std::max(pt, kLogFloor));
    }
    return total / n;
}

void nll_backward(const Tensor& logits, int target, double scale, Tensor& d) {
    const int n = logits.dim(0);
    for (int i = 0; i < n; ++i) {
        const TwoProbs p = softmax2(logits.data() + 2 * i);
        const double pt = target == 0 ? p.p0 : p.p1;
        if (pt < kLogFloor) continue;  // clamped: flat
        d.at(i, 0) += static_cast<float>(scale * (p.p0 - (target == 0 ? 1.0 : 0.0)) / n);
        d.at(i, 1) += static_cast<float>(scale * (p.p1 - (target == 1 ? 1.0 : 0.0)) / n);
    }
}

}  // namespace

double discriminator_loss(const Tensor& real_logits, const Tensor& fake_logits) {
    return nll(real_logits, kRealClass) + nll(fake_logits, kFakeClass);
}

std::pair<Tensor, Tensor> discriminator_loss_backward(const Tensor& real_logits,
                                                      const Tensor& fake_logits) {
    check_logits(real_logits);
    check_logits(fake_logits);
    Tensor d_real(real_logits.shape()), d_fake(fake_logits.shape());
    nll_backward(real_logits, kRealClass, 1.0, d_real);
    nll_backward(fake_logits, kFakeClass, 1.0, d_fake);
    return {std::move(d_real), std::move(d_fake)};
}

double adversarial_fool_term(const Tensor& fake_logits) {
    // log(1 - p_real) == log p_fake for the 2-way softmax
    return -nll(fake_logits, kFakeClass);
}

Tensor adversarial_fool_term_backward(const Tensor& fake_logits, double scale) {
    check_logits(fake_logits);
    Tensor d(fake_logits.shape());
    nll_backward(fake_logits, kFakeClass, -scale, d);
    return d;
}

double generator_loss(const Tensor& d_fake_logits, const Tensor& field_or_mask,
                      const AugmentorLossWeights& weights) {
    double loss = 0.0;
    if (weights.lambda_adv != 0.0)
        loss += weights.lambda_adv * adversarial_fool_term(d_fake_logits);
    if (weights.lambda_big != 0.0) {
        double l1 = 0.0;
        for (std::int64_t i = 0; i < field_or_mask.size(); ++i)
            l1 += std::abs(static_cast<double>(field_or_mask[i]));
        const int batch = field_or_mask.rank() == 4 ? field_or_mask.dim(0) : 1;
        loss += weights.lambda_big * (-l1 / batch);
    }
    return loss;
}

Tensor magnitude_term_backward(const Tensor& field_or_mask, double lambda_big) {
    Tensor d(field_or_mask.shape());
    if (lambda_big == 0.0) return d;
    const int batch = field_or_mask.rank() == 4 ? field_or_mask.dim(0) : 1;
    const float g = static_cast<float>(lambda_big / batch);
    for (std::int64_t i = 0; i < field_or_mask.size(); ++i) {
        const float v = field_or_mask[i];
        d[i] = v > 0.0f ? -g : (v < 0.0f ? g : 0.0f);
    }
    return d;
}

}  // namespace taskaug::gan
