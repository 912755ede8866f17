#pragma once

#include <utility>

#include "taskaug/core/tensor.hpp"

namespace taskaug::gan {

// Logit column 1 = "real", column 0 = "fake/generated".
inline constexpr int kFakeClass = 0;
inline constexpr int kRealClass = 1;

// Probabilities inside logs are floored at 1e-12 so saturated discriminators
// cannot produce infinities; the clamped region carries zero gradient.
inline constexpr double kLogFloor = 1e-12;

struct AugmentorLossWeights {
    double lambda_adv = 1.0;
    double lambda_big = 1e-3;
};

// -E_real[log p_real] - E_fake[log p_fake]; 2*log 2 at chance.
double discriminator_loss(const Tensor& real_logits, const Tensor& fake_logits);
std::pair<Tensor, Tensor> discriminator_loss_backward(const Tensor& real_logits,
                                                      const Tensor& fake_logits);

// E_fake[log(1 - p_real)] = E_fake[log p_fake]; the generator minimizes this.
double adversarial_fool_term(const Tensor& fake_logits);
Tensor adversarial_fool_term_backward(const Tensor& fake_logits, double scale);

// lambda_adv * fool term + lambda_big * (-L1 magnitude). field_or_mask may be
// (H,W,C) (single sample) or (N,H,W,C) (per-sample L1 averaged over N).
// Exactly 0 when both weights are 0.
double generator_loss(const Tensor& d_fake_logits, const Tensor& field_or_mask,
                      const AugmentorLossWeights& weights);

// d/d(field) of the magnitude term: -lambda_big * sign(field) / batch.
Tensor magnitude_term_backward(const Tensor& field_or_mask, double lambda_big);

}  // namespace taskaug::gan
