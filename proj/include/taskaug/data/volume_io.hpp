#pragma once

#include <string>
#include <vector>

#include "taskaug/data/volume.hpp"

namespace taskaug::data {

// Self-describing single-subject container (.tav): JSON header with subject
// metadata and dims, followed by raw little-endian float32 image voxels and
// uint8 labels.
void save_volume(const VolumeRecord& rec, const std::string& path);
VolumeRecord load_volume(const std::string& path);

// Loads every *.tav under dir (sorted by filename).
std::vector<VolumeRecord> load_volume_dir(const std::string& dir);
void save_volume_dir(const std::vector<VolumeRecord>& records, const std::string& dir);

// Minimal uncompressed NIfTI-1 (.nii) support, enough to ingest externally
// prepared volumes: dims 1..3, datatypes uint8/int16/uint16/int32/float32/
// float64, pixdim spacing. scl_slope/scl_inter are applied when set.
Tensor read_nifti(const std::string& path, std::array<double, 3>& spacing_out);
void write_nifti(const Tensor& volume, const std::array<double, 3>& spacing,
                 const std::string& path);

// Raw-volume ingestion for one cardiac phase: reads groups.txt
// ("<subject> <group>" lines) plus <subject>_<phase>_image.nii and
// <subject>_<phase>_label.nii from input_dir. Records come back unnormalized.
std::vector<VolumeRecord> ingest_nifti_dir(const std::string& input_dir,
                                           const std::string& phase);

}  // namespace taskaug::data
