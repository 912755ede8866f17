#pragma once

#include <cstdint>

#include "taskaug/core/rng.hpp"
#include "taskaug/data/slice_batch.hpp"
#include "taskaug/warp/warp.hpp"

namespace taskaug::aug {

using data::SliceBatch;

enum class AffineMode { Identity, RotateSmall, Scale, Rotate45N, FlipX };

struct AffineParams {
    AffineMode mode = AffineMode::Identity;
    double angle_deg = 0.0;    // RotateSmall, in [-15,15]
    double scale_factor = 1.0; // Scale, in [0.9,1.1]
    int n_quarter = 0;         // Rotate45N: angle = 45 deg * n, n in [0,8]
};

struct MixupConfig {
    double alpha = 0.2;  // Beta(alpha,alpha) concentration; must be > 0
};

// Builds the backward-sampling displacement field of an affine map about the
// image centre. Multiples of 90 degrees produce exact integer displacements.
warp::DeformationField affine_field(const AffineParams& params, int h, int w);

// Applies one affine transform to an image slice and its one-hot labels
// (same spatial map; labels renormalized, out-of-view = background).
// Identity mode returns the inputs unchanged.
void apply_affine(const AffineParams& params, Tensor& image_hw, Tensor& labels_hw4);

// Per slice: uniform choice among {identity, rotate in [-15,15] deg, scale in
// [0.9,1.1], rotation of 45 deg * N with N in [0,8], x-flip}.
SliceBatch affine_augment(const SliceBatch& batch, std::uint64_t rng_seed);

AffineParams draw_affine_params(Rng& rng);

// Elastic deformation: per slice a 3x3x2 coarse grid ~ N(0, sigma^2) pixels,
// bicubic-upscaled to a dense field, applied by the warp engine.
SliceBatch random_elastic(const SliceBatch& batch, double sigma, std::uint64_t rng_seed);

// Deterministic core used by random_elastic and the tests.
void apply_elastic_from_grid(const Tensor& coarse_3x3x2, Tensor& image_hw, Tensor& labels_hw4);

// Contrast then brightness: x <- (x - mean)*c + mean; x <- x + b with
// c ~ U[0.8,1.2], b ~ U[-0.1,0.1] per slice. Labels unchanged.
SliceBatch random_intensity(const SliceBatch& batch, std::uint64_t rng_seed,
                            double c_lo = 0.8, double c_hi = 1.2, double b_lo = -0.1,
                            double b_hi = 0.1);

void apply_contrast_brightness(Tensor& image_hw, double c, double b);

// Pairwise convex combination with per-pair lambda ~ Beta(alpha,alpha)
// restricted to [0,1); soft labels.
SliceBatch mixup(const SliceBatch& batch_a, const SliceBatch& batch_b, const MixupConfig& cfg,
                 std::uint64_t rng_seed);

// Test/composition hook with explicit lambdas (one per pair).
SliceBatch mixup_with_lambdas(const SliceBatch& batch_a, const SliceBatch& batch_b,
                              const std::vector<double>& lambdas);

double sample_mixup_lambda(const MixupConfig& cfg, Rng& rng);

}  // namespace taskaug::aug
