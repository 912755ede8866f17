#pragma once

#include <cmath>

namespace taskaug::warp::detail {

// Backward warping of one scalar plane: dst(y,x) = sample of src at
// (y + dy(y,x), x + dx(y,x)) with bilinear weights. Source reads outside
// [0,H)x[0,W) contribute `fill`.
template <typename T>
void warp_plane(const T* src, int h, int w, const T* dy, const T* dx, T fill, T* dst) {
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int p = y * w + x;
            const T sy = static_cast<T>(y) + dy[p];
            const T sx = static_cast<T>(x) + dx[p];
            const int y0 = static_cast<int>(std::floor(sy));
            const int x0 = static_cast<int>(std::floor(sx));
            const T fy = sy - static_cast<T>(y0);
            const T fx = sx - static_cast<T>(x0);
            const T w00 = (T(1) - fy) * (T(1) - fx);
            const T w01 = (T(1) - fy) * fx;
            const T w10 = fy * (T(1) - fx);
            const T w11 = fy * fx;
            auto tap = [&](int yy, int xx) -> T {
                return (yy >= 0 && yy < h && xx >= 0 && xx < w) ? src[yy * w + xx] : fill;
            };
            dst[p] = w00 * tap(y0, x0) + w01 * tap(y0, x0 + 1) + w10 * tap(y0 + 1, x0) +
                     w11 * tap(y0 + 1, x0 + 1);
        }
    }
}

// Gradients of warp_plane. d_src/d_dy/d_dx are accumulated into (callers
// zero-initialize); any of them may be null to skip that input.
template <typename T>
void warp_plane_backward(const T* src, int h, int w, const T* dy, const T* dx, T fill,
                         const T* d_dst, T* d_src, T* d_dy, T* d_dx) {
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int p = y * w + x;
            const T g = d_dst[p];
            if (g == T(0)) continue;
            const T sy = static_cast<T>(y) + dy[p];
            const T sx = static_cast<T>(x) + dx[p];
            const int y0 = static_cast<int>(std::floor(sy));
            const int x0 = static_cast<int>(std::floor(sx));
            const T fy = sy - static_cast<T>(y0);
            const T fx = sx - static_cast<T>(x0);
            auto inb = [&](int yy, int xx) { return yy >= 0 && yy < h && xx >= 0 && xx < w; };
            auto tap = [&](int yy, int xx) -> T { return inb(yy, xx) ? src[yy * w + xx] : fill; };
            const T v00 = tap(y0, x0), v01 = tap(y0, x0 + 1);
            const T v10 = tap(y0 + 1, x0), v11 = tap(y0 + 1, x0 + 1);
            if (d_src) {
                auto add = [&](int yy, int xx, T wgt) {
                    if (inb(yy, xx)) d_src[yy * w + xx] += g * wgt;
                };
                add(y0, x0, (T(1) - fy) * (T(1) - fx));
                add(y0, x0 + 1, (T(1) - fy) * fx);
                add(y0 + 1, x0, fy * (T(1) - fx));
                add(y0 + 1, x0 + 1, fy * fx);
            }
            if (d_dy)
                d_dy[p] += g * ((T(1) - fx) * (v10 - v00) + fx * (v11 - v01));
            if (d_dx)
                d_dx[p] += g * ((T(1) - fy) * (v01 - v00) + fy * (v11 - v10));
        }
    }
}

template <typename T>
T l1_sum(const T* v, std::int64_t n) {
    T s = T(0);
    for (std::int64_t i = 0; i < n; ++i) s += v[i] < T(0) ? -v[i] : v[i];
    return s;
}

}  // namespace taskaug::warp::detail
