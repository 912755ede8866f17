#include "taskaug/core/image_ops.hpp"

#include <algorithm>
#include <cmath>

#include "taskaug/core/errors.hpp"

namespace taskaug {

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline double src_coord(int dst, int dst_n, int src_n) {
    // Half-pixel convention: centers of the output grid map onto centers of
    // the input grid under uniform scaling.
    const double scale = static_cast<double>(src_n) / dst_n;
    return (dst + 0.5) * scale - 0.5;
}

// Catmull-Rom weights for fractional offset t in [0,1).
inline void catmull_rom(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
    w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
    w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}

}  // namespace

Tensor resize_bilinear(const Tensor& image, int out_h, int out_w) {
    if (image.rank() != 2) throw ShapeMismatch("resize_bilinear expects (H,W)");
    const int h = image.dim(0), w = image.dim(1);
    if (h == out_h && w == out_w) return image;
    Tensor out({out_h, out_w});
    for (int y = 0; y < out_h; ++y) {
        const double sy = std::clamp(src_coord(y, out_h, h), 0.0, static_cast<double>(h - 1));
        const int y0 = clampi(static_cast<int>(std::floor(sy)), 0, h - 1);
        const int y1 = clampi(y0 + 1, 0, h - 1);
        const double fy = sy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double sx = std::clamp(src_coord(x, out_w, w), 0.0, static_cast<double>(w - 1));
            const int x0 = clampi(static_cast<int>(std::floor(sx)), 0, w - 1);
            const int x1 = clampi(x0 + 1, 0, w - 1);
            const double fx = sx - x0;
            const double v = (1 - fy) * ((1 - fx) * image.at(y0, x0) + fx * image.at(y0, x1)) +
                             fy * ((1 - fx) * image.at(y1, x0) + fx * image.at(y1, x1));
            out.at(y, x) = static_cast<float>(v);
        }
    }
    return out;
}

Tensor resize_nearest(const Tensor& image, int out_h, int out_w) {
    if (image.rank() != 2) throw ShapeMismatch("resize_nearest expects (H,W)");
    const int h = image.dim(0), w = image.dim(1);
    if (h == out_h && w == out_w) return image;
    Tensor out({out_h, out_w});
    for (int y = 0; y < out_h; ++y) {
        const double cy = std::clamp(src_coord(y, out_h, h), 0.0, static_cast<double>(h - 1));
        const int sy = clampi(static_cast<int>(std::lround(cy)), 0, h - 1);
        for (int x = 0; x < out_w; ++x) {
            const double cx = std::clamp(src_coord(x, out_w, w), 0.0, static_cast<double>(w - 1));
            const int sx = clampi(static_cast<int>(std::lround(cx)), 0, w - 1);
            out.at(y, x) = image.at(sy, sx);
        }
    }
    return out;
}

Tensor center_crop_pad(const Tensor& image, int out_h, int out_w, float pad_value) {
    if (image.rank() != 2) throw ShapeMismatch("center_crop_pad expects (H,W)");
    const int h = image.dim(0), w = image.dim(1);
    if (h == out_h && w == out_w) return image;
    Tensor out({out_h, out_w}, pad_value);
    // Offset of the output origin in input coordinates.
    const int oy = (h - out_h) / 2;
    const int ox = (w - out_w) / 2;
    for (int y = 0; y < out_h; ++y) {
        const int sy = y + oy;
        if (sy < 0 || sy >= h) continue;
        for (int x = 0; x < out_w; ++x) {
            const int sx = x + ox;
            if (sx < 0 || sx >= w) continue;
            out.at(y, x) = image.at(sy, sx);
        }
    }
    return out;
}

Tensor upscale_bicubic_grid(const Tensor& coarse, int out_h, int out_w) {
    if (coarse.rank() != 3) throw ShapeMismatch("upscale_bicubic_grid expects (gh,gw,C)");
    const int gh = coarse.dim(0), gw = coarse.dim(1), c = coarse.dim(2);
    Tensor out({out_h, out_w, c});
    for (int y = 0; y < out_h; ++y) {
        const double u = out_h > 1 ? static_cast<double>(y) * (gh - 1) / (out_h - 1)
                                   : 0.5 * (gh - 1);
        int u0 = static_cast<int>(std::floor(u));
        if (u0 > gh - 2) u0 = gh - 2;  // keep t in [0,1] at the top edge
        const double ty = u - u0;
        double wy[4];
        catmull_rom(ty, wy);
        for (int x = 0; x < out_w; ++x) {
            const double v = out_w > 1 ? static_cast<double>(x) * (gw - 1) / (out_w - 1)
                                       : 0.5 * (gw - 1);
            int v0 = static_cast<int>(std::floor(v));
            if (v0 > gw - 2) v0 = gw - 2;
            const double tx = v - v0;
            double wx[4];
            catmull_rom(tx, wx);
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int i = 0; i < 4; ++i) {
                    const int gy = clampi(u0 - 1 + i, 0, gh - 1);
                    double row = 0.0;
                    for (int j = 0; j < 4; ++j) {
                        const int gx = clampi(v0 - 1 + j, 0, gw - 1);
                        row += wx[j] * coarse.at(gy, gx, ch);
                    }
                    acc += wy[i] * row;
                }
                out.at(y, x, ch) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

}  // namespace taskaug
