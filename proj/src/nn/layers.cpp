#include "taskaug/nn/layers.hpp"

#include <Eigen/Core>
#include <cmath>

#include "taskaug/core/errors.hpp"

namespace taskaug::nn {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using CMapM = Eigen::Map<const MatRM>;

int conv_out_dim(int n, int k, int stride, int pad) { return (n + 2 * pad - k) / stride + 1; }

// Gathers one sample's receptive fields into rows of `cols`
// (OH*OW, k*k*C); out-of-image taps are zero.
void im2col(const float* x, int h, int w, int c, int k, int stride, int pad, int oh, int ow,
            float* cols) {
    const int patch = k * k * c;
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            float* row = cols + (static_cast<size_t>(oy) * ow + ox) * patch;
            for (int ky = 0; ky < k; ++ky) {
                const int iy = oy * stride + ky - pad;
                for (int kx = 0; kx < k; ++kx) {
                    const int ix = ox * stride + kx - pad;
                    float* dst = row + (ky * k + kx) * c;
                    if (iy >= 0 && iy < h && ix >= 0 && ix < w) {
                        const float* src = x + (static_cast<size_t>(iy) * w + ix) * c;
                        for (int ch = 0; ch < c; ++ch) dst[ch] = src[ch];
                    } else {
                        for (int ch = 0; ch < c; ++ch) dst[ch] = 0.0f;
                    }
                }
            }
        }
    }
}

void col2im_accum(const float* cols, int h, int w, int c, int k, int stride, int pad, int oh,
                  int ow, float* dx) {
    const int patch = k * k * c;
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const float* row = cols + (static_cast<size_t>(oy) * ow + ox) * patch;
            for (int ky = 0; ky < k; ++ky) {
                const int iy = oy * stride + ky - pad;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < k; ++kx) {
                    const int ix = ox * stride + kx - pad;
                    if (ix < 0 || ix >= w) continue;
                    const float* src = row + (ky * k + kx) * c;
                    float* dst = dx + (static_cast<size_t>(iy) * w + ix) * c;
                    for (int ch = 0; ch < c; ++ch) dst[ch] += src[ch];
                }
            }
        }
    }
}

void he_normal(Tensor& t, int fan_in, Rng& rng) {
    std::normal_distribution<float> dist(0.0f, std::sqrt(2.0f / static_cast<float>(fan_in)));
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv2D

Conv2D::Conv2D(std::string name, int in_ch, int out_ch, int ksize, int stride)
    : in_ch_(in_ch),
      out_ch_(out_ch),
      k_(ksize),
      stride_(stride),
      pad_(ksize / 2),
      w_(name + ".w", {ksize, ksize, in_ch, out_ch}),
      b_(name + ".b", {out_ch}) {}

void Conv2D::init_he(Rng& rng) { he_normal(w_.value, k_ * k_ * in_ch_, rng); }

void Conv2D::set_bias(int channel, float value) { b_.value[channel] = value; }

void Conv2D::collect(std::vector<Param*>& out) {
    out.push_back(&w_);
    out.push_back(&b_);
}

Tensor Conv2D::forward(const Tensor& x) {
    if (x.rank() != 4 || x.dim(3) != in_ch_) throw ShapeMismatch("Conv2D input");
    x_ = x;
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int oh = conv_out_dim(h, k_, stride_, pad_);
    const int ow = conv_out_dim(w, k_, stride_, pad_);
    const int rows = oh * ow, patch = k_ * k_ * in_ch_;

    Tensor y({n, oh, ow, out_ch_});
    AlignedFloats cols(static_cast<size_t>(rows) * patch);
    CMapM wm(w_.value.data(), patch, out_ch_);
    for (int i = 0; i < n; ++i) {
        im2col(x.data() + static_cast<size_t>(i) * h * w * in_ch_, h, w, in_ch_, k_, stride_, pad_,
               oh, ow, cols.data());
        MapM ym(y.data() + static_cast<size_t>(i) * rows * out_ch_, rows, out_ch_);
        CMapM cm(cols.data(), rows, patch);
        ym.noalias() = cm * wm;
        ym.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(b_.value.data(), out_ch_);
    }
    return y;
}

Tensor Conv2D::backward(const Tensor& dy, bool want_dx) {
    if (dy.rank() != 4 || dy.dim(3) != out_ch_ || dy.dim(0) != x_.dim(0))
        throw ShapeMismatch("Conv2D backward gradient");
    const int n = x_.dim(0), h = x_.dim(1), w = x_.dim(2);
    const int oh = dy.dim(1), ow = dy.dim(2);
    const int rows = oh * ow, patch = k_ * k_ * in_ch_;

    Tensor dx;
    if (want_dx) dx = Tensor(x_.shape());
    AlignedFloats cols(static_cast<size_t>(rows) * patch);
    AlignedFloats dcols(static_cast<size_t>(rows) * patch);
    MapM dwm(w_.grad.data(), patch, out_ch_);
    CMapM wm(w_.value.data(), patch, out_ch_);
    Eigen::Map<Eigen::RowVectorXf> dbm(b_.grad.data(), out_ch_);
    for (int i = 0; i < n; ++i) {
        im2col(x_.data() + static_cast<size_t>(i) * h * w * in_ch_, h, w, in_ch_, k_, stride_,
               pad_, oh, ow, cols.data());
        CMapM cm(cols.data(), rows, patch);
        CMapM dym(dy.data() + static_cast<size_t>(i) * rows * out_ch_, rows, out_ch_);
        dwm.noalias() += cm.transpose() * dym;
        dbm += dym.colwise().sum();
        if (want_dx) {
            MapM dcm(dcols.data(), rows, patch);
            dcm.noalias() = dym * wm.transpose();
            col2im_accum(dcols.data(), h, w, in_ch_, k_, stride_, pad_, oh, ow,
                         dx.data() + static_cast<size_t>(i) * h * w * in_ch_);
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(std::string name, int channels, float momentum, float eps)
    : channels_(channels),
      momentum_(momentum),
      eps_(eps),
      gamma_(name + ".gamma", {channels}),
      beta_(name + ".beta", {channels}),
      running_mean_({channels}),
      running_var_({channels}, 1.0f) {
    gamma_.value.fill(1.0f);
}

void BatchNorm::collect(std::vector<Param*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
}

Tensor BatchNorm::forward(const Tensor& x, Mode mode, bool update_running) {
    if (x.dim(x.rank() - 1) != channels_) throw ShapeMismatch("BatchNorm channels");
    mode_ = mode;
    const std::int64_t rows = x.size() / channels_;
    Tensor y(x.shape());
    x_hat_ = Tensor(x.shape());
    inv_std_.assign(channels_, 0.0f);

    std::vector<double> mean(channels_, 0.0), var(channels_, 0.0);
    if (mode == Mode::Train) {
        for (std::int64_t r = 0; r < rows; ++r)
            for (int c = 0; c < channels_; ++c) mean[c] += x[r * channels_ + c];
        for (int c = 0; c < channels_; ++c) mean[c] /= static_cast<double>(rows);
        for (std::int64_t r = 0; r < rows; ++r)
            for (int c = 0; c < channels_; ++c) {
                const double d = x[r * channels_ + c] - mean[c];
                var[c] += d * d;
            }
        for (int c = 0; c < channels_; ++c) var[c] /= static_cast<double>(rows);
        if (update_running) {
            for (int c = 0; c < channels_; ++c) {
                running_mean_[c] = momentum_ * running_mean_[c] +
                                   (1.0f - momentum_) * static_cast<float>(mean[c]);
                running_var_[c] = momentum_ * running_var_[c] +
                                  (1.0f - momentum_) * static_cast<float>(var[c]);
            }
        }
    } else {
        for (int c = 0; c < channels_; ++c) {
            mean[c] = running_mean_[c];
            var[c] = running_var_[c];
        }
    }
    for (int c = 0; c < channels_; ++c)
        inv_std_[c] = static_cast<float>(1.0 / std::sqrt(var[c] + eps_));
    for (std::int64_t r = 0; r < rows; ++r)
        for (int c = 0; c < channels_; ++c) {
            const float xh = (x[r * channels_ + c] - static_cast<float>(mean[c])) * inv_std_[c];
            x_hat_[r * channels_ + c] = xh;
            y[r * channels_ + c] = gamma_.value[c] * xh + beta_.value[c];
        }
    return y;
}

Tensor BatchNorm::backward(const Tensor& dy) {
    if (!dy.same_shape(x_hat_)) throw ShapeMismatch("BatchNorm backward gradient");
    const std::int64_t rows = dy.size() / channels_;
    Tensor dx(dy.shape());
    std::vector<double> sum_dy(channels_, 0.0), sum_dy_xh(channels_, 0.0);
    for (std::int64_t r = 0; r < rows; ++r)
        for (int c = 0; c < channels_; ++c) {
            const float g = dy[r * channels_ + c];
            sum_dy[c] += g;
            sum_dy_xh[c] += g * x_hat_[r * channels_ + c];
        }
    for (int c = 0; c < channels_; ++c) {
        gamma_.grad[c] += static_cast<float>(sum_dy_xh[c]);
        beta_.grad[c] += static_cast<float>(sum_dy[c]);
    }
    if (mode_ == Mode::Train) {
        const double inv_rows = 1.0 / static_cast<double>(rows);
        for (std::int64_t r = 0; r < rows; ++r)
            for (int c = 0; c < channels_; ++c) {
                const double g = dy[r * channels_ + c];
                const double xh = x_hat_[r * channels_ + c];
                dx[r * channels_ + c] = static_cast<float>(
                    gamma_.value[c] * inv_std_[c] *
                    (g - inv_rows * sum_dy[c] - xh * inv_rows * sum_dy_xh[c]));
            }
    } else {
        for (std::int64_t r = 0; r < rows; ++r)
            for (int c = 0; c < channels_; ++c)
                dx[r * channels_ + c] = dy[r * channels_ + c] * gamma_.value[c] * inv_std_[c];
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::string name, int in_features, int out_features)
    : in_f_(in_features),
      out_f_(out_features),
      w_(name + ".w", {in_features, out_features}),
      b_(name + ".b", {out_features}) {}

void Dense::init_he(Rng& rng) { he_normal(w_.value, in_f_, rng); }

void Dense::collect(std::vector<Param*>& out) {
    out.push_back(&w_);
    out.push_back(&b_);
}

Tensor Dense::forward(const Tensor& x) {
    if (x.rank() != 2 || x.dim(1) != in_f_) throw ShapeMismatch("Dense input");
    x_ = x;
    const int n = x.dim(0);
    Tensor y({n, out_f_});
    CMapM xm(x.data(), n, in_f_), wm(w_.value.data(), in_f_, out_f_);
    MapM ym(y.data(), n, out_f_);
    ym.noalias() = xm * wm;
    ym.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(b_.value.data(), out_f_);
    return y;
}

Tensor Dense::backward(const Tensor& dy, bool want_dx) {
    const int n = x_.dim(0);
    CMapM xm(x_.data(), n, in_f_), dym(dy.data(), n, out_f_), wm(w_.value.data(), in_f_, out_f_);
    MapM dwm(w_.grad.data(), in_f_, out_f_);
    dwm.noalias() += xm.transpose() * dym;
    Eigen::Map<Eigen::RowVectorXf>(b_.grad.data(), out_f_) += dym.colwise().sum();
    Tensor dx;
    if (want_dx) {
        dx = Tensor(x_.shape());
        MapM dxm(dx.data(), n, in_f_);
        dxm.noalias() = dym * wm.transpose();
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Activations

Tensor ReLU::forward(const Tensor& x) {
    mask_.assign(static_cast<size_t>(x.size()), 0);
    Tensor y(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0f) {
            y[i] = x[i];
            mask_[static_cast<size_t>(i)] = 1;
        }
    }
    return y;
}

Tensor ReLU::backward(const Tensor& dy) const {
    Tensor dx(dy.shape());
    for (std::int64_t i = 0; i < dy.size(); ++i)
        dx[i] = mask_[static_cast<size_t>(i)] ? dy[i] : 0.0f;
    return dx;
}

Tensor LeakyReLU::forward(const Tensor& x) {
    mask_.assign(static_cast<size_t>(x.size()), 0);
    Tensor y(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0f) {
            y[i] = x[i];
            mask_[static_cast<size_t>(i)] = 1;
        } else {
            y[i] = slope_ * x[i];
        }
    }
    return y;
}

Tensor LeakyReLU::backward(const Tensor& dy) const {
    Tensor dx(dy.shape());
    for (std::int64_t i = 0; i < dy.size(); ++i)
        dx[i] = mask_[static_cast<size_t>(i)] ? dy[i] : slope_ * dy[i];
    return dx;
}

Tensor Tanh::forward(const Tensor& x) {
    y_ = Tensor(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) y_[i] = std::tanh(x[i]);
    return y_;
}

Tensor Tanh::backward(const Tensor& dy) const {
    Tensor dx(dy.shape());
    for (std::int64_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * (1.0f - y_[i] * y_[i]);
    return dx;
}

// ---------------------------------------------------------------------------
// MaxPool2x2

Tensor MaxPool2x2::forward(const Tensor& x) {
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    if (h % 2 != 0 || w % 2 != 0) throw ShapeMismatch("MaxPool2x2 needs even dims");
    shape_in_ = x.shape();
    const int oh = h / 2, ow = w / 2;
    Tensor y({n, oh, ow, c});
    argmax_.assign(static_cast<size_t>(y.size()), 0);
    for (int i = 0; i < n; ++i)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int ch = 0; ch < c; ++ch) {
                    float best = -std::numeric_limits<float>::infinity();
                    std::int64_t best_idx = 0;
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const std::int64_t idx =
                                ((static_cast<std::int64_t>(i) * h + oy * 2 + dy) * w + ox * 2 +
                                 dx) *
                                    c +
                                ch;
                            if (x[idx] > best) {
                                best = x[idx];
                                best_idx = idx;
                            }
                        }
                    const std::int64_t oidx =
                        ((static_cast<std::int64_t>(i) * oh + oy) * ow + ox) * c + ch;
                    y[oidx] = best;
                    argmax_[static_cast<size_t>(oidx)] = static_cast<std::int32_t>(best_idx);
                }
    return y;
}

Tensor MaxPool2x2::backward(const Tensor& dy) const {
    Tensor dx(shape_in_);
    for (std::int64_t i = 0; i < dy.size(); ++i)
        dx[argmax_[static_cast<size_t>(i)]] += dy[i];
    return dx;
}

// ---------------------------------------------------------------------------
// Upsample2x

namespace {
// out(2k)   = 0.25*in(k-1) + 0.75*in(k)
// out(2k+1) = 0.75*in(k)   + 0.25*in(k+1)   (indices clamp at the edges)
struct UpTap {
    int i0, i1;
    float w0, w1;
};

std::vector<UpTap> up_taps(int n_in) {
    std::vector<UpTap> taps(static_cast<size_t>(n_in) * 2);
    for (int i = 0; i < 2 * n_in; ++i) {
        const int k = i / 2;
        UpTap t{};
        if (i % 2 == 0) {
            t.i0 = k > 0 ? k - 1 : 0;
            t.i1 = k;
            t.w0 = 0.25f;
            t.w1 = 0.75f;
        } else {
            t.i0 = k;
            t.i1 = k + 1 < n_in ? k + 1 : n_in - 1;
            t.w0 = 0.75f;
            t.w1 = 0.25f;
        }
        taps[static_cast<size_t>(i)] = t;
    }
    return taps;
}
}  // namespace

Tensor Upsample2x::forward(const Tensor& x) {
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    shape_in_ = x.shape();
    const auto ty = up_taps(h), tx = up_taps(w);
    Tensor y({n, h * 2, w * 2, c});
    for (int i = 0; i < n; ++i)
        for (int oy = 0; oy < 2 * h; ++oy) {
            const UpTap& a = ty[static_cast<size_t>(oy)];
            for (int ox = 0; ox < 2 * w; ++ox) {
                const UpTap& b = tx[static_cast<size_t>(ox)];
                const float* r00 = x.data() + ((static_cast<std::int64_t>(i) * h + a.i0) * w + b.i0) * c;
                const float* r01 = x.data() + ((static_cast<std::int64_t>(i) * h + a.i0) * w + b.i1) * c;
                const float* r10 = x.data() + ((static_cast<std::int64_t>(i) * h + a.i1) * w + b.i0) * c;
                const float* r11 = x.data() + ((static_cast<std::int64_t>(i) * h + a.i1) * w + b.i1) * c;
                float* dst = y.data() + ((static_cast<std::int64_t>(i) * 2 * h + oy) * 2 * w + ox) * c;
                for (int ch = 0; ch < c; ++ch)
                    dst[ch] = a.w0 * (b.w0 * r00[ch] + b.w1 * r01[ch]) +
                              a.w1 * (b.w0 * r10[ch] + b.w1 * r11[ch]);
            }
        }
    return y;
}

Tensor Upsample2x::backward(const Tensor& dy) const {
    const int n = shape_in_[0], h = shape_in_[1], w = shape_in_[2], c = shape_in_[3];
    const auto ty = up_taps(h), tx = up_taps(w);
    Tensor dx(shape_in_);
    for (int i = 0; i < n; ++i)
        for (int oy = 0; oy < 2 * h; ++oy) {
            const UpTap& a = ty[static_cast<size_t>(oy)];
            for (int ox = 0; ox < 2 * w; ++ox) {
                const UpTap& b = tx[static_cast<size_t>(ox)];
                const float* src =
                    dy.data() + ((static_cast<std::int64_t>(i) * 2 * h + oy) * 2 * w + ox) * c;
                float* r00 = dx.data() + ((static_cast<std::int64_t>(i) * h + a.i0) * w + b.i0) * c;
                float* r01 = dx.data() + ((static_cast<std::int64_t>(i) * h + a.i0) * w + b.i1) * c;
                float* r10 = dx.data() + ((static_cast<std::int64_t>(i) * h + a.i1) * w + b.i0) * c;
                float* r11 = dx.data() + ((static_cast<std::int64_t>(i) * h + a.i1) * w + b.i1) * c;
                for (int ch = 0; ch < c; ++ch) {
                    const float g = src[ch];
                    r00[ch] += a.w0 * b.w0 * g;
                    r01[ch] += a.w0 * b.w1 * g;
                    r10[ch] += a.w1 * b.w0 * g;
                    r11[ch] += a.w1 * b.w1 * g;
                }
            }
        }
    return dx;
}

// ---------------------------------------------------------------------------

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    const int n = a.dim(0), h = a.dim(1), w = a.dim(2), ca = a.dim(3), cb = b.dim(3);
    if (b.dim(0) != n || b.dim(1) != h || b.dim(2) != w)
        throw ShapeMismatch("concat_channels spatial dims");
    Tensor y({n, h, w, ca + cb});
    const std::int64_t pixels = static_cast<std::int64_t>(n) * h * w;
    for (std::int64_t p = 0; p < pixels; ++p) {
        float* dst = y.data() + p * (ca + cb);
        const float* pa = a.data() + p * ca;
        const float* pb = b.data() + p * cb;
        for (int ch = 0; ch < ca; ++ch) dst[ch] = pa[ch];
        for (int ch = 0; ch < cb; ++ch) dst[ca + ch] = pb[ch];
    }
    return y;
}

void split_channels(const Tensor& dy, int ca, Tensor& da, Tensor& db) {
    const int n = dy.dim(0), h = dy.dim(1), w = dy.dim(2), ct = dy.dim(3);
    const int cb = ct - ca;
    da = Tensor({n, h, w, ca});
    db = Tensor({n, h, w, cb});
    const std::int64_t pixels = static_cast<std::int64_t>(n) * h * w;
    for (std::int64_t p = 0; p < pixels; ++p) {
        const float* src = dy.data() + p * ct;
        float* pa = da.data() + p * ca;
        float* pb = db.data() + p * cb;
        for (int ch = 0; ch < ca; ++ch) pa[ch] = src[ch];
        for (int ch = 0; ch < cb; ++ch) pb[ch] = src[ca + ch];
    }
}

}  // namespace taskaug::nn
