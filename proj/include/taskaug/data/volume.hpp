#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "taskaug/core/tensor.hpp"

namespace taskaug::data {

// Label values: 0 = background, 1 = RV, 2 = Myo, 3 = LV.
enum Structure : int { kBackground = 0, kRV = 1, kMyo = 2, kLV = 3 };
inline constexpr int kNumClasses = 4;

const char* structure_name(int s);

// Integer label volume (D slices of H x W).
struct LabelVolume {
    int depth = 0, height = 0, width = 0;
    std::vector<std::uint8_t> values;

    LabelVolume() = default;
    LabelVolume(int d, int h, int w)
        : depth(d), height(h), width(w), values(static_cast<size_t>(d) * h * w, 0) {}

    std::uint8_t& at(int z, int y, int x) {
        return values[(static_cast<size_t>(z) * height + y) * width + x];
    }
    std::uint8_t at(int z, int y, int x) const {
        return values[(static_cast<size_t>(z) * height + y) * width + x];
    }
    std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
};

// One subject: 3D image (D,H,W), labels, pathology group, voxel geometry.
struct VolumeRecord {
    std::string subject_id;
    std::string group;
    Tensor image;  // (D,H,W)
    LabelVolume labels;
    std::array<double, 2> in_plane_spacing{1.0, 1.0};  // mm
    double slice_thickness = 1.0;                      // mm

    int depth() const { return image.dim(0); }
    int height() const { return image.dim(1); }
    int width() const { return image.dim(2); }
};

// Throws ShapeMismatch / std::invalid_argument on violated invariants:
// matching shapes and label values within {0..3}.
void validate_record(const VolumeRecord& rec);

}  // namespace taskaug::data
