#pragma once

#include <array>

#include "taskaug/core/tensor.hpp"
#include "taskaug/data/volume.hpp"

namespace taskaug::seg {

// Per-class loss weights for (background, RV, Myo, LV).
struct ClassWeights {
    std::array<float, data::kNumClasses> w{0.1f, 0.3f, 0.3f, 0.3f};
};

// Mean over batch x pixels of the weighted soft-target cross-entropy.
// include_background=false zeroes the background weight: used when training
// the segmenter alone; the augmentation phase keeps it on.
double weighted_cross_entropy(const Tensor& logits, const Tensor& target_onehot,
                              const ClassWeights& weights, bool include_background);

// Gradient w.r.t. logits, and optionally w.r.t. the soft target (needed when
// warped labels carry gradients back into a generator).
Tensor weighted_cross_entropy_backward(const Tensor& logits, const Tensor& target_onehot,
                                       const ClassWeights& weights, bool include_background,
                                       Tensor* d_target = nullptr);

// argmax over the class axis -> (H,W) hard labels (as floats).
Tensor argmax_labels(const Tensor& logits_hw4);

}  // namespace taskaug::seg
