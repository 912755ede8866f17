#pragma once

#include "taskaug/core/tensor.hpp"

namespace taskaug::warp {

inline constexpr int kNumClasses = 4;

// Dense per-pixel displacement map, shape (H,W,2), channel 0 = dy, channel 1
// = dx, in pixel units. Applied by backward warping: output(p) samples the
// input at p + v(p).
struct DeformationField {
    Tensor displacements;  // (H,W,2)

    int height() const { return displacements.dim(0); }
    int width() const { return displacements.dim(1); }
};

DeformationField make_field(int h, int w);

// Additive per-pixel intensity offset, shape (H,W), |delta| <= 1.
struct IntensityMask {
    Tensor delta;  // (H,W)
};

// image: (H,W) or (H,W,C). Out-of-bounds samples read `fill` (0 by default).
Tensor warp_bilinear(const Tensor& image, const DeformationField& field, float fill = 0.0f);

// One-hot (possibly soft) labels (H,W,4). Each channel is warped with the
// image sampler; out-of-bounds mass goes to background (channel 0 fills with
// 1, foreground with 0). Channels are renormalized to sum to 1; an all-zero
// pixel becomes pure background.
Tensor warp_labels(const Tensor& labels_onehot, const DeformationField& field);

Tensor apply_intensity(const Tensor& image, const IntensityMask& mask);

// Sum of absolute values over the whole array. The generator training loss
// uses the negation of this as the transformation-magnitude incentive.
double field_l1_magnitude(const Tensor& field_or_mask);

struct WarpGrads {
    Tensor d_image;
    Tensor d_field;
};

// Gradients of warp_bilinear w.r.t. image and field, given d(loss)/d(output).
WarpGrads warp_bilinear_backward(const Tensor& image, const DeformationField& field,
                                 const Tensor& d_output, float fill = 0.0f);

// Gradient of warp_labels w.r.t. the field (through the per-channel warp and
// the renormalization). The label input is a data leaf; its gradient is not
// produced.
Tensor warp_labels_backward_field(const Tensor& labels_onehot, const DeformationField& field,
                                  const Tensor& d_output);

}  // namespace taskaug::warp
