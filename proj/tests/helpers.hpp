#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "taskaug/core/rng.hpp"
#include "taskaug/core/tensor.hpp"
#include "taskaug/data/slice_batch.hpp"

namespace testutil {

using taskaug::Rng;
using taskaug::Tensor;

inline Tensor random_tensor(std::vector<int> shape, std::uint64_t seed, float lo = -1.0f,
                            float hi = 1.0f) {
    Tensor t(std::move(shape));
    Rng rng(seed);
    std::uniform_real_distribution<float> dist(lo, hi);
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

// Central finite differences of a scalar functional, double precision.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f(x);
        x[i] = orig - h;
        const double fm = f(x);
        x[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline bool grad_close(double analytic, double numeric, double rel_tol = 1e-3,
                       double abs_floor = 1e-8) {
    const double diff = std::abs(analytic - numeric);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    return diff <= abs_floor || diff <= rel_tol * scale;
}

// A simple labelled slice batch: ellipse phantoms, valid one-hot labels.
inline taskaug::data::SliceBatch phantom_batch(int n, int grid, std::uint64_t seed) {
    using namespace taskaug;
    data::SliceBatch batch = data::make_batch(n, grid, grid);
    Rng rng(seed);
    std::uniform_real_distribution<double> jitter(0.8, 1.2);
    for (int i = 0; i < n; ++i) {
        const double cy = grid / 2.0 + (jitter(rng) - 1.0) * grid * 0.2;
        const double cx = grid / 2.0 + (jitter(rng) - 1.0) * grid * 0.2;
        const double r_lv = grid * 0.12 * jitter(rng);
        const double r_myo = r_lv + grid * 0.08 * jitter(rng);
        const double rv_cy = cy, rv_cx = cx + r_myo + grid * 0.08;
        const double r_rv = grid * 0.09 * jitter(rng);
        for (int y = 0; y < grid; ++y)
            for (int x = 0; x < grid; ++x) {
                const double d = std::hypot(y - cy, x - cx);
                const double drv = std::hypot(y - rv_cy, x - rv_cx);
                int cls = 0;
                if (d <= r_lv) cls = data::kLV;
                else if (d <= r_myo) cls = data::kMyo;
                else if (drv <= r_rv) cls = data::kRV;
                const float levels[4] = {0.15f, 0.8f, 0.5f, 0.95f};
                batch.images.at(i, y, x, 0) = levels[cls];
                batch.labels.at(i, y, x, cls) = 1.0f;
            }
        batch.provenance[static_cast<size_t>(i)].subject_id = "phantom" + std::to_string(i);
        batch.provenance[static_cast<size_t>(i)].slice_index = 0;
    }
    return batch;
}

inline bool tensors_equal(const Tensor& a, const Tensor& b, float tol = 0.0f) {
    if (!a.same_shape(b)) return false;
    for (std::int64_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

}  // namespace testutil
