#pragma once

#include <cassert>
#include <cstdint>
#include <cstdlib>
#include <new>
#include <numeric>
#include <vector>

namespace taskaug {

// 64-byte aligned allocator. Buffers handed to the matrix kernels always get
// the same alignment, which keeps vectorized accumulation orders identical
// across runs (bit-for-bit reproducible training).
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t kAlign = 64;

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) {}

    T* allocate(std::size_t n) {
        void* p = std::aligned_alloc(kAlign, ((n * sizeof(T) + kAlign - 1) / kAlign) * kAlign);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { std::free(p); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const { return true; }
    template <typename U>
    bool operator!=(const AlignedAllocator<U>&) const { return false; }
};

using AlignedFloats = std::vector<float, AlignedAllocator<float>>;

// Dense row-major float tensor, rank 0..4. Channels-last layout is used
// throughout: images are (H,W) or (H,W,C), batches are (N,H,W,C).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        data_.assign(static_cast<size_t>(count(shape_)), 0.0f);
    }
    Tensor(std::vector<int> shape, float fill) : shape_(std::move(shape)) {
        data_.assign(static_cast<size_t>(count(shape_)), fill);
    }

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, float v) { return Tensor(std::move(shape), v); }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& operator[](std::int64_t i) { return data_[static_cast<size_t>(i)]; }
    float operator[](std::int64_t i) const { return data_[static_cast<size_t>(i)]; }

    float& at(int i, int j) { return data_[static_cast<size_t>(i) * shape_[1] + j]; }
    float at(int i, int j) const { return data_[static_cast<size_t>(i) * shape_[1] + j]; }
    float& at(int i, int j, int k) {
        return data_[(static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k];
    }
    float at(int i, int j, int k) const {
        return data_[(static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k];
    }
    float& at(int i, int j, int k, int l) {
        return data_[((static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }
    float at(int i, int j, int k, int l) const {
        return data_[((static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }

    void fill(float v) { std::fill(data_.begin(), data_.end(), v); }
    void zero() { fill(0.0f); }

    // Reinterprets the buffer with a new shape of identical element count.
    Tensor reshaped(std::vector<int> shape) const {
        assert(count(shape) == size());
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = data_;
        return t;
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    static std::int64_t count(const std::vector<int>& shape) {
        std::int64_t n = 1;
        for (int d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

private:
    std::vector<int> shape_;
    AlignedFloats data_;
};

inline double sum_abs(const Tensor& t) {
    double s = 0.0;
    for (std::int64_t i = 0; i < t.size(); ++i) s += t[i] < 0 ? -t[i] : t[i];
    return s;
}

inline double max_abs(const Tensor& t) {
    double m = 0.0;
    for (std::int64_t i = 0; i < t.size(); ++i) {
        double a = t[i] < 0 ? -t[i] : t[i];
        if (a > m) m = a;
    }
    return m;
}

}  // namespace taskaug
