#include "taskaug/data/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "taskaug/core/rng.hpp"
#include "taskaug/data/pipeline.hpp"

namespace taskaug::data {

namespace {

struct GroupTraits {
    const char* name;
    double myo_frac;    // outer ring radius as fraction of grid
    double wall_frac;   // ring thickness as fraction of myo radius
    double rv_frac;
    double contrast;    // appearance gain multiplier
};

// Five pseudo-pathology groups with systematic shape/contrast differences.
constexpr GroupTraits kGroups[5] = {
    {"NOR", 0.21, 0.40, 0.095, 1.00},
    {"DIL", 0.25, 0.25, 0.090, 0.95},
    {"HYP", 0.22, 0.55, 0.085, 1.05},
    {"RVA", 0.20, 0.40, 0.140, 1.00},
    {"LOW", 0.22, 0.40, 0.100, 0.65},
};

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// z-profile of the ellipsoidal heart: radius multiplier for slice z.
double z_scale(const PhantomShape& s, int z) {
    const double t = (static_cast<double>(z) - s.z_center) / s.z_extent;
    const double v = 1.0 - t * t;
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

int classify(const PhantomShape& s, int z, int y, int x) {
    const double sz = z_scale(s, z);
    if (sz < 0.05) return kBackground;
    const double dy = static_cast<double>(y) - s.cy;
    const double dx = (static_cast<double>(x) - s.cx) / s.axis_ratio;
    const double d = std::sqrt(dy * dy + dx * dx);
    if (d <= s.lv_radius * sz) return kLV;
    if (d <= s.myo_radius * sz) return kMyo;
    const double rvy = s.cy + s.rv_dist * sz * std::sin(s.rv_angle);
    const double rvx = s.cx + s.rv_dist * sz * std::cos(s.rv_angle) * s.axis_ratio;
    const double ry = static_cast<double>(y) - rvy;
    const double rx = static_cast<double>(x) - rvx;
    if (std::sqrt(ry * ry + rx * rx) <= s.rv_radius * sz) return kRV;
    return kBackground;
}

}  // namespace

std::vector<PhantomSpec> synthetic_phantom_specs(int n_subjects, std::uint64_t seed, int grid_size,
                                                 int n_slices) {
    if (n_subjects < 12) throw std::invalid_argument("need at least 12 synthetic subjects");
    std::vector<PhantomSpec> specs;
    specs.reserve(static_cast<size_t>(n_subjects));
    const double g = static_cast<double>(grid_size);
    for (int i = 0; i < n_subjects; ++i) {
        const GroupTraits& traits = kGroups[i % 5];
        Rng rng(derive_seed(seed, 0x543d, static_cast<std::uint64_t>(i)));
        PhantomSpec spec;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "synth%03d", i);
        spec.subject_id = buf;
        spec.group = traits.name;

        PhantomShape& s = spec.shape;
        s.cy = g / 2.0 + uniform(rng, -0.05, 0.05) * g;
        s.cx = g / 2.0 + uniform(rng, -0.05, 0.05) * g;
        s.myo_radius = traits.myo_frac * g * uniform(rng, 0.88, 1.12);
        s.lv_radius = s.myo_radius * (1.0 - traits.wall_frac * uniform(rng, 0.85, 1.15));
        s.axis_ratio = uniform(rng, 0.8, 1.2);
        s.rv_radius = traits.rv_frac * g * uniform(rng, 0.85, 1.15);
        s.rv_dist = s.myo_radius + 0.9 * s.rv_radius;
        s.rv_angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        s.z_center = (static_cast<double>(n_slices) - 1.0) / 2.0 + uniform(rng, -0.3, 0.3);
        s.z_extent = static_cast<double>(n_slices) * uniform(rng, 0.75, 0.95);

        PhantomAppearance& a = spec.appearance;
        a.bg = 0.18 * uniform(rng, 0.8, 1.2);
        a.lv = 0.92 * uniform(rng, 0.9, 1.1);
        a.myo = 0.48 * uniform(rng, 0.9, 1.1);
        a.rv = 0.80 * uniform(rng, 0.9, 1.1);
        a.gain = traits.contrast * uniform(rng, 0.9, 1.1);
        a.offset = uniform(rng, -0.05, 0.05);
        a.noise_sigma = 0.02 * uniform(rng, 0.5, 1.5);
        a.grad_y = uniform(rng, -0.08, 0.08);
        a.grad_x = uniform(rng, -0.08, 0.08);
        specs.push_back(std::move(spec));
    }
    return specs;
}

LabelVolume render_phantom_labels(const PhantomSpec& spec, int grid_size, int n_slices) {
    LabelVolume labels(n_slices, grid_size, grid_size);
    for (int z = 0; z < n_slices; ++z)
        for (int y = 0; y < grid_size; ++y)
            for (int x = 0; x < grid_size; ++x)
                labels.at(z, y, x) = static_cast<std::uint8_t>(classify(spec.shape, z, y, x));
    return labels;
}

std::vector<VolumeRecord> make_synthetic_dataset(int n_subjects, std::uint64_t seed, int grid_size,
                                                 int n_slices) {
    const auto specs = synthetic_phantom_specs(n_subjects, seed, grid_size, n_slices);
    std::vector<VolumeRecord> records;
    records.reserve(specs.size());
    for (size_t i = 0; i < specs.size(); ++i) {
        const PhantomSpec& spec = specs[i];
        VolumeRecord rec;
        rec.subject_id = spec.subject_id;
        rec.group = spec.group;
        rec.in_plane_spacing = {kTargetSpacingMm, kTargetSpacingMm};
        rec.slice_thickness = 8.0;
        rec.labels = render_phantom_labels(spec, grid_size, n_slices);
        rec.image = Tensor({n_slices, grid_size, grid_size});

        Rng noise(derive_seed(seed, 0xA015E, i));
        std::normal_distribution<double> jitter(0.0, spec.appearance.noise_sigma);
        const PhantomAppearance& a = spec.appearance;
        const double levels[4] = {a.bg, a.rv, a.myo, a.lv};
        for (int z = 0; z < n_slices; ++z)
            for (int y = 0; y < grid_size; ++y)
                for (int x = 0; x < grid_size; ++x) {
                    const int cls = rec.labels.at(z, y, x);
                    double v = a.offset + a.gain * levels[cls] +
                               a.grad_y * (static_cast<double>(y) / grid_size) +
                               a.grad_x * (static_cast<double>(x) / grid_size) + jitter(noise);
                    rec.image.at(z, y, x) = static_cast<float>(v);
                }
        rec.image = normalize_volume(rec.image);
        validate_record(rec);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace taskaug::data
