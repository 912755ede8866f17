#pragma once

#include <cstdint>
#include <vector>

#include "taskaug/data/volume.hpp"

namespace taskaug::data {

// Analytic phantom geometry: an elliptical myocardium ring around the LV
// cavity with an adjacent RV blob, scaled through-plane by an ellipsoid
// profile. Labels are rasterized from exactly these predicates, so an
// independent rasterization of the same parameters reproduces them.
struct PhantomShape {
    double cy = 0, cx = 0;
    double lv_radius = 0;    // cavity radius (pixels)
    double myo_radius = 0;   // outer ring radius
    double axis_ratio = 1;   // x-axis scale of the ellipse
    double rv_radius = 0;
    double rv_angle = 0;     // direction of the RV blob centre
    double rv_dist = 0;      // distance of the RV blob centre
    double z_center = 0, z_extent = 1;
};

struct PhantomAppearance {
    double bg = 0.2, lv = 0.9, myo = 0.5, rv = 0.8;
    double gain = 1.0, offset = 0.0;
    double noise_sigma = 0.02;
    double grad_y = 0.0, grad_x = 0.0;  // smooth intensity gradient
};

struct PhantomSpec {
    std::string subject_id;
    std::string group;
    PhantomShape shape;
    PhantomAppearance appearance;
};

// Deterministic per (n_subjects, seed); subjects cycle through 5 pseudo-groups
// with systematic per-group shape/contrast differences plus per-subject jitter.
std::vector<PhantomSpec> synthetic_phantom_specs(int n_subjects, std::uint64_t seed, int grid_size,
                                                 int n_slices);

LabelVolume render_phantom_labels(const PhantomSpec& spec, int grid_size, int n_slices);

// Full dataset: rendered intensities (percentile-normalized) plus labels.
// Requires n_subjects >= 12 so every group is populated.
std::vector<VolumeRecord> make_synthetic_dataset(int n_subjects, std::uint64_t seed,
                                                 int grid_size = 32, int n_slices = 6);

}  // namespace taskaug::data
