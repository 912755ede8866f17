#include "taskaug/warp/warp.hpp"

#include <cmath>
#include <vector>

#include "taskaug/core/errors.hpp"
#include "taskaug/warp/warp_kernels.hpp"

namespace taskaug::warp {

namespace {

constexpr float kRenormEps = 1e-8f;

void check_field(const Tensor& image, const DeformationField& field) {
    if (field.displacements.rank() != 3 || field.displacements.dim(2) != 2)
        throw ShapeMismatch("deformation field must be (H,W,2)");
    if (image.dim(0) != field.height() || image.dim(1) != field.width())
        throw ShapeMismatch("field grid does not match image grid");
}

// Splits interleaved (H,W,2) displacements into planar dy/dx buffers.
void split_field(const Tensor& f, std::vector<float>& dy, std::vector<float>& dx) {
    const int h = f.dim(0), w = f.dim(1);
    dy.resize(static_cast<size_t>(h) * w);
    dx.resize(static_cast<size_t>(h) * w);
    const float* p = f.data();
    for (int i = 0; i < h * w; ++i) {
        dy[i] = p[2 * i];
        dx[i] = p[2 * i + 1];
    }
}

}  // namespace

DeformationField make_field(int h, int w) { return DeformationField{Tensor({h, w, 2})}; }

Tensor warp_bilinear(const Tensor& image, const DeformationField& field, float fill) {
    if (image.rank() != 2 && image.rank() != 3)
        throw ShapeMismatch("warp_bilinear expects (H,W) or (H,W,C)");
    check_field(image, field);
    const int h = image.dim(0), w = image.dim(1);
    const int c = image.rank() == 3 ? image.dim(2) : 1;

    std::vector<float> dy, dx;
    split_field(field.displacements, dy, dx);

    Tensor out(image.shape());
    std::vector<float> plane(static_cast<size_t>(h) * w), warped(static_cast<size_t>(h) * w);
    for (int ch = 0; ch < c; ++ch) {
        for (int i = 0; i < h * w; ++i) plane[i] = image.data()[static_cast<size_t>(i) * c + ch];
        detail::warp_plane(plane.data(), h, w, dy.data(), dx.data(), fill, warped.data());
        for (int i = 0; i < h * w; ++i) out.data()[static_cast<size_t>(i) * c + ch] = warped[i];
    }
    return out;
}

Tensor warp_labels(const Tensor& labels_onehot, const DeformationField& field) {
    if (labels_onehot.rank() != 3 || labels_onehot.dim(2) != kNumClasses)
        throw ShapeMismatch("warp_labels expects (H,W,4)");
    check_field(labels_onehot, field);
    const int h = labels_onehot.dim(0), w = labels_onehot.dim(1);

    std::vector<float> dy, dx;
    split_field(field.displacements, dy, dx);

    Tensor out(labels_onehot.shape());
    std::vector<float> plane(static_cast<size_t>(h) * w), warped(static_cast<size_t>(h) * w);
    for (int ch = 0; ch < kNumClasses; ++ch) {
        const float fill = ch == 0 ? 1.0f : 0.0f;
        for (int i = 0; i < h * w; ++i)
            plane[i] = labels_onehot.data()[static_cast<size_t>(i) * kNumClasses + ch];
        detail::warp_plane(plane.data(), h, w, dy.data(), dx.data(), fill, warped.data());
        for (int i = 0; i < h * w; ++i)
            out.data()[static_cast<size_t>(i) * kNumClasses + ch] = warped[i];
    }
    for (int i = 0; i < h * w; ++i) {
        float* px = out.data() + static_cast<size_t>(i) * kNumClasses;
        float s = px[0] + px[1] + px[2] + px[3];
        if (s > kRenormEps) {
            for (int ch = 0; ch < kNumClasses; ++ch) px[ch] /= s;
        } else {
            px[0] = 1.0f;
            px[1] = px[2] = px[3] = 0.0f;
        }
    }
    return out;
}

Tensor apply_intensity(const Tensor& image, const IntensityMask& mask) {
    if (image.rank() != 2) throw ShapeMismatch("apply_intensity expects (H,W)");
    if (!image.same_shape(mask.delta)) throw ShapeMismatch("intensity mask grid mismatch");
    Tensor out(image.shape());
    for (std::int64_t i = 0; i < image.size(); ++i) out[i] = image[i] + mask.delta[i];
    return out;
}

double field_l1_magnitude(const Tensor& field_or_mask) {
    double s = 0.0;
    for (std::int64_t i = 0; i < field_or_mask.size(); ++i)
        s += std::abs(static_cast<double>(field_or_mask[i]));
    return s;
}

WarpGrads warp_bilinear_backward(const Tensor& image, const DeformationField& field,
                                 const Tensor& d_output, float fill) {
    if (!image.same_shape(d_output)) throw ShapeMismatch("d_output shape mismatch");
    check_field(image, field);
    const int h = image.dim(0), w = image.dim(1);
    const int c = image.rank() == 3 ? image.dim(2) : 1;

    std::vector<float> dy, dx;
    split_field(field.displacements, dy, dx);

    WarpGrads g{Tensor(image.shape()), Tensor(field.displacements.shape())};
    std::vector<float> plane(static_cast<size_t>(h) * w), dplane(static_cast<size_t>(h) * w);
    std::vector<float> dsrc(static_cast<size_t>(h) * w);
    std::vector<float> gdy(static_cast<size_t>(h) * w, 0.0f), gdx(static_cast<size_t>(h) * w, 0.0f);
    for (int ch = 0; ch < c; ++ch) {
        for (int i = 0; i < h * w; ++i) {
            plane[i] = image.data()[static_cast<size_t>(i) * c + ch];
            dplane[i] = d_output.data()[static_cast<size_t>(i) * c + ch];
        }
        std::fill(dsrc.begin(), dsrc.end(), 0.0f);
        detail::warp_plane_backward(plane.data(), h, w, dy.data(), dx.data(), fill, dplane.data(),
                                    dsrc.data(), gdy.data(), gdx.data());
        for (int i = 0; i < h * w; ++i) g.d_image.data()[static_cast<size_t>(i) * c + ch] = dsrc[i];
    }
    for (int i = 0; i < h * w; ++i) {
        g.d_field.data()[2 * i] = gdy[i];
        g.d_field.data()[2 * i + 1] = gdx[i];
    }
    return g;
}

Tensor warp_labels_backward_field(const Tensor& labels_onehot, const DeformationField& field,
                                  const Tensor& d_output) {
    if (!labels_onehot.same_shape(d_output)) throw ShapeMismatch("d_output shape mismatch");
    check_field(labels_onehot, field);
    const int h = labels_onehot.dim(0), w = labels_onehot.dim(1);

    std::vector<float> dy, dx;
    split_field(field.displacements, dy, dx);

    // Recompute pre-renormalization warped channels.
    std::vector<std::vector<float>> warped(kNumClasses);
    std::vector<float> plane(static_cast<size_t>(h) * w);
    for (int ch = 0; ch < kNumClasses; ++ch) {
        warped[ch].resize(static_cast<size_t>(h) * w);
        const float fill = ch == 0 ? 1.0f : 0.0f;
        for (int i = 0; i < h * w; ++i)
            plane[i] = labels_onehot.data()[static_cast<size_t>(i) * kNumClasses + ch];
        detail::warp_plane(plane.data(), h, w, dy.data(), dx.data(), fill, warped[ch].data());
    }

    // Backward through out_c = w_c / s, s = sum_k w_k:
    //   dL/dw_c = dL/dout_c / s - (sum_k dL/dout_k * w_k) / s^2
    std::vector<std::vector<float>> d_warped(kNumClasses,
                                             std::vector<float>(static_cast<size_t>(h) * w, 0.0f));
    for (int i = 0; i < h * w; ++i) {
        float s = 0.0f;
        for (int ch = 0; ch < kNumClasses; ++ch) s += warped[ch][i];
        if (s <= kRenormEps) continue;  // clamped to background; no gradient
        double dot = 0.0;
        for (int ch = 0; ch < kNumClasses; ++ch)
            dot += static_cast<double>(d_output.data()[static_cast<size_t>(i) * kNumClasses + ch]) *
                   warped[ch][i];
        for (int ch = 0; ch < kNumClasses; ++ch) {
            const float go = d_output.data()[static_cast<size_t>(i) * kNumClasses + ch];
            d_warped[ch][i] = static_cast<float>(go / s - dot / (static_cast<double>(s) * s));
        }
    }

    Tensor d_field(field.displacements.shape());
    std::vector<float> gdy(static_cast<size_t>(h) * w, 0.0f), gdx(static_cast<size_t>(h) * w, 0.0f);
    for (int ch = 0; ch < kNumClasses; ++ch) {
        const float fill = ch == 0 ? 1.0f : 0.0f;
        for (int i = 0; i < h * w; ++i)
            plane[i] = labels_onehot.data()[static_cast<size_t>(i) * kNumClasses + ch];
        detail::warp_plane_backward(plane.data(), h, w, dy.data(), dx.data(), fill,
                                    d_warped[ch].data(), static_cast<float*>(nullptr), gdy.data(),
                                    gdx.data());
    }
    for (int i = 0; i < h * w; ++i) {
        d_field.data()[2 * i] = gdy[i];
        d_field.data()[2 * i + 1] = gdx[i];
    }
    return d_field;
}

}  // namespace taskaug::warp
