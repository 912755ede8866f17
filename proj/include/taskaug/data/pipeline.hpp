#pragma once

#include <utility>

#include "taskaug/data/volume.hpp"

namespace taskaug::data {

inline constexpr double kTargetSpacingMm = 1.367;
inline constexpr int kTargetSize = 224;

// Linear-interpolation percentile over all voxels (q in [0,100]).
double percentile(const Tensor& volume, double q);

// (x - x2) / (x98 - x2) over the whole 3D volume. Values outside the 2nd and
// 98th percentiles map outside [0,1]. Throws DegenerateVolume when
// x98 - x2 < 1e-12.
Tensor normalize_volume(const Tensor& image);

// Resamples one slice to target_spacing (bilinear for the image, nearest
// neighbour for labels), then center-crops / zero-pads both to
// (target_size, target_size). labels_slice holds integer values in float.
std::pair<Tensor, Tensor> resample_slice(const Tensor& image_slice, const Tensor& labels_slice,
                                         std::array<double, 2> spacing,
                                         double target_spacing = kTargetSpacingMm,
                                         int target_size = kTargetSize);

// normalize + per-slice resample/crop for a whole record. An external N4
// bias-correction pass, when available, runs before this hook; the pipeline
// itself starts at normalization.
VolumeRecord preprocess_record(const VolumeRecord& rec, double target_spacing = kTargetSpacingMm,
                               int target_size = kTargetSize);

}  // namespace taskaug::data
