#pragma once

#include "taskaug/core/tensor.hpp"

namespace taskaug {

// Pixel-center (half-pixel) bilinear resize of a (H,W) plane; source reads
// clamp to the edge.
Tensor resize_bilinear(const Tensor& image, int out_h, int out_w);

// Nearest-neighbour resize for integer-valued planes.
Tensor resize_nearest(const Tensor& image, int out_h, int out_w);

// Center-crop or zero-pad a (H,W) plane to (out_h,out_w).
Tensor center_crop_pad(const Tensor& image, int out_h, int out_w, float pad_value = 0.0f);

// Upscales a coarse control grid (gh,gw,C) to a dense (H,W,C) array with
// Catmull-Rom bicubic interpolation. Grid corners align with image corners;
// border control points replicate. Weights sum to 1, so a constant grid maps
// to a constant field; 2D overshoot is bounded by (1.25)^2 of the coarse
// max magnitude.
Tensor upscale_bicubic_grid(const Tensor& coarse, int out_h, int out_w);

}  // namespace taskaug
