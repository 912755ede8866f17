#include "taskaug/data/slice_batch.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "taskaug/core/errors.hpp"

namespace taskaug::data {

SliceBatch make_batch(int n, int h, int w) {
    SliceBatch b;
    b.images = Tensor({n, h, w, 1});
    b.labels = Tensor({n, h, w, kNumClasses});
    b.provenance.resize(static_cast<size_t>(n));
    return b;
}

Tensor one_hot_slice(const LabelVolume& labels, int z) {
    Tensor out({labels.height, labels.width, kNumClasses});
    for (int y = 0; y < labels.height; ++y)
        for (int x = 0; x < labels.width; ++x)
            out.at(y, x, labels.at(z, y, x)) = 1.0f;
    return out;
}

void check_batch(const SliceBatch& batch, float tol) {
    if (batch.images.rank() != 4 || batch.labels.rank() != 4)
        throw ShapeMismatch("SliceBatch tensors must be 4D");
    if (batch.images.dim(0) != batch.labels.dim(0) || batch.images.dim(1) != batch.labels.dim(1) ||
        batch.images.dim(2) != batch.labels.dim(2))
        throw ShapeMismatch("SliceBatch image/label dims differ");
    if (batch.images.dim(3) != 1 || batch.labels.dim(3) != kNumClasses)
        throw ShapeMismatch("SliceBatch channel counts");
    if (batch.provenance.size() != static_cast<size_t>(batch.batch()))
        throw ShapeMismatch("SliceBatch provenance size");
    const std::int64_t pixels = batch.labels.size() / kNumClasses;
    for (std::int64_t p = 0; p < pixels; ++p) {
        const float* px = batch.labels.data() + p * kNumClasses;
        float s = 0.0f;
        for (int c = 0; c < kNumClasses; ++c) {
            if (px[c] < -tol) throw std::invalid_argument("negative label probability");
            s += px[c];
        }
        if (std::abs(s - 1.0f) > tol) throw std::invalid_argument("label simplex violated");
    }
}

SlicePool build_slice_pool(const std::vector<VolumeRecord>& records,
                           const std::vector<std::string>& subject_ids) {
    std::map<std::string, int> index_of;
    for (size_t i = 0; i < records.size(); ++i) index_of[records[i].subject_id] = static_cast<int>(i);
    SlicePool pool;
    pool.records = &records;
    for (const auto& id : subject_ids) {
        auto it = index_of.find(id);
        if (it == index_of.end()) throw std::invalid_argument("unknown subject id " + id);
        const VolumeRecord& rec = records[static_cast<size_t>(it->second)];
        for (int z = 0; z < rec.depth(); ++z) pool.entries.emplace_back(it->second, z);
    }
    return pool;
}

SliceBatch gather_batch(const SlicePool& pool, const std::vector<int>& entry_indices) {
    if (pool.entries.empty()) throw EmptySplit("slice pool is empty");
    const VolumeRecord& first = (*pool.records)[static_cast<size_t>(pool.entries[0].first)];
    const int h = first.height(), w = first.width();
    SliceBatch batch = make_batch(static_cast<int>(entry_indices.size()), h, w);
    for (size_t i = 0; i < entry_indices.size(); ++i) {
        const auto [ri, z] = pool.entries[static_cast<size_t>(entry_indices[i])];
        const VolumeRecord& rec = (*pool.records)[static_cast<size_t>(ri)];
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                batch.images.at(static_cast<int>(i), y, x, 0) = rec.image.at(z, y, x);
        Tensor oh = one_hot_slice(rec.labels, z);
        std::copy(oh.data(), oh.data() + oh.size(),
                  batch.labels.data() + static_cast<std::int64_t>(i) * oh.size());
        batch.provenance[i] = SliceProvenance{rec.subject_id, z, "real", false};
    }
    return batch;
}

LabelVolume stack_predictions(const std::vector<Tensor>& hard_slices) {
    if (hard_slices.empty()) return {};
    const int h = hard_slices[0].dim(0), w = hard_slices[0].dim(1);
    LabelVolume vol(static_cast<int>(hard_slices.size()), h, w);
    for (size_t z = 0; z < hard_slices.size(); ++z)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                vol.at(static_cast<int>(z), y, x) =
                    static_cast<std::uint8_t>(hard_slices[z].at(y, x));
    return vol;
}

}  // namespace taskaug::data
