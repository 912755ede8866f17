#pragma once

#include <string>
#include <vector>

#include "taskaug/data/volume.hpp"

namespace taskaug::data {

struct SliceProvenance {
    std::string subject_id;
    int slice_index = -1;
    std::string lineage = "real";  // transform chain, e.g. "real/affine", "gen:gd"
    bool generated = false;
};

// A batch of 2D slices with one-hot (possibly soft) label maps. Production
// preprocessing emits 224x224 slices; the desk-scale synthetic path uses a
// smaller grid, so dimensions are carried explicitly.
struct SliceBatch {
    Tensor images;  // (N,H,W,1)
    Tensor labels;  // (N,H,W,4)
    std::vector<SliceProvenance> provenance;

    int batch() const { return images.empty() ? 0 : images.dim(0); }
    int height() const { return images.dim(1); }
    int width() const { return images.dim(2); }
};

SliceBatch make_batch(int n, int h, int w);

// One-hot encodes slice z of a label volume -> (H,W,4).
Tensor one_hot_slice(const LabelVolume& labels, int z);

// Checks dims and the per-pixel label simplex (sum 1 within tol, entries
// >= -tol). Throws on violation.
void check_batch(const SliceBatch& batch, float tol = 1e-5f);

// Flattened (record, slice) index over a subject subset, in deterministic
// order; the sampling unit for training batches.
struct SlicePool {
    const std::vector<VolumeRecord>* records = nullptr;
    std::vector<std::pair<int, int>> entries;  // (record index, slice index)

    int size() const { return static_cast<int>(entries.size()); }
};

SlicePool build_slice_pool(const std::vector<VolumeRecord>& records,
                           const std::vector<std::string>& subject_ids);

// Gathers pool entries into a batch (copying image + one-hot labels).
SliceBatch gather_batch(const SlicePool& pool, const std::vector<int>& entry_indices);

// Stacks per-slice predicted hard labels back into a volume for Dice.
LabelVolume stack_predictions(const std::vector<Tensor>& hard_slices);

}  // namespace taskaug::data
