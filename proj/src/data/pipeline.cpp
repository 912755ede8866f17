#include "taskaug/data/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "taskaug/core/errors.hpp"
#include "taskaug/core/image_ops.hpp"

namespace taskaug::data {

const char* structure_name(int s) {
    switch (s) {
        case kBackground: return "BG";
        case kRV: return "RV";
        case kMyo: return "Myo";
        case kLV: return "LV";
        default: return "?";
    }
}

void validate_record(const VolumeRecord& rec) {
    if (rec.image.rank() != 3) throw ShapeMismatch("volume image must be (D,H,W)");
    if (rec.labels.depth != rec.depth() || rec.labels.height != rec.height() ||
        rec.labels.width != rec.width())
        throw ShapeMismatch("image and labels must share spatial shape");
    for (std::uint8_t v : rec.labels.values)
        if (v >= kNumClasses) throw std::invalid_argument("label value out of {0,1,2,3}");
    if (rec.in_plane_spacing[0] <= 0 || rec.in_plane_spacing[1] <= 0 || rec.slice_thickness <= 0)
        throw std::invalid_argument("voxel spacing must be positive");
}

double percentile(const Tensor& volume, double q) {
    std::vector<float> v(volume.data(), volume.data() + volume.size());
    std::sort(v.begin(), v.end());
    const std::int64_t n = static_cast<std::int64_t>(v.size());
    if (n == 1) return v[0];
    const double pos = q / 100.0 * static_cast<double>(n - 1);
    const std::int64_t lo = static_cast<std::int64_t>(std::floor(pos));
    const std::int64_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return (1.0 - frac) * v[static_cast<size_t>(lo)] + frac * v[static_cast<size_t>(hi)];
}

Tensor normalize_volume(const Tensor& image) {
    const double x2 = percentile(image, 2.0);
    const double x98 = percentile(image, 98.0);
    const double range = x98 - x2;
    if (range < 1e-12) throw DegenerateVolume("2nd..98th percentile range collapsed");
    Tensor out(image.shape());
    for (std::int64_t i = 0; i < image.size(); ++i)
        out[i] = static_cast<float>((image[i] - x2) / range);
    return out;
}

std::pair<Tensor, Tensor> resample_slice(const Tensor& image_slice, const Tensor& labels_slice,
                                         std::array<double, 2> spacing, double target_spacing,
                                         int target_size) {
    if (image_slice.rank() != 2 || !image_slice.same_shape(labels_slice))
        throw ShapeMismatch("resample_slice expects matching (H,W) slices");
    if (spacing[0] <= 0 || spacing[1] <= 0)
        throw std::invalid_argument("spacing must be positive");
    const int h = image_slice.dim(0), w = image_slice.dim(1);
    const int rh = std::max(1, static_cast<int>(std::lround(h * spacing[0] / target_spacing)));
    const int rw = std::max(1, static_cast<int>(std::lround(w * spacing[1] / target_spacing)));

    Tensor img = (rh == h && rw == w) ? image_slice : resize_bilinear(image_slice, rh, rw);
    Tensor lbl = (rh == h && rw == w) ? labels_slice : resize_nearest(labels_slice, rh, rw);
    img = center_crop_pad(img, target_size, target_size, 0.0f);
    lbl = center_crop_pad(lbl, target_size, target_size, 0.0f);  // pad as background
    return {std::move(img), std::move(lbl)};
}

VolumeRecord preprocess_record(const VolumeRecord& rec, double target_spacing, int target_size) {
    validate_record(rec);
    Tensor norm = normalize_volume(rec.image);
    const int d = rec.depth();
    VolumeRecord out;
    out.subject_id = rec.subject_id;
    out.group = rec.group;
    out.in_plane_spacing = {target_spacing, target_spacing};
    out.slice_thickness = rec.slice_thickness;
    out.image = Tensor({d, target_size, target_size});
    out.labels = LabelVolume(d, target_size, target_size);
    for (int z = 0; z < d; ++z) {
        Tensor img({rec.height(), rec.width()});
        Tensor lbl({rec.height(), rec.width()});
        for (int y = 0; y < rec.height(); ++y)
            for (int x = 0; x < rec.width(); ++x) {
                img.at(y, x) = norm.at(z, y, x);
                lbl.at(y, x) = static_cast<float>(rec.labels.at(z, y, x));
            }
        auto [ri, rl] = resample_slice(img, lbl, rec.in_plane_spacing, target_spacing, target_size);
        for (int y = 0; y < target_size; ++y)
            for (int x = 0; x < target_size; ++x) {
                out.image.at(z, y, x) = ri.at(y, x);
                out.labels.at(z, y, x) = static_cast<std::uint8_t>(rl.at(y, x));
            }
    }
    return out;
}

}  // namespace taskaug::data
