#include "taskaug/aug/classic.hpp"

#include <cmath>
#include <numbers>

#include "taskaug/core/errors.hpp"
#include "taskaug/core/image_ops.hpp"
#include "taskaug/core/rng.hpp"

namespace taskaug::aug {

namespace {

using data::kNumClasses;

// Rotation matrix entries; exact {0,+-1} at multiples of 90 degrees so that
// those rotations reduce to index permutations under bilinear sampling.
void rotation_entries(double deg, double& c, double& s) {
    const int q = static_cast<int>(std::lround(deg / 90.0));
    if (std::abs(deg - 90.0 * q) < 1e-12) {
        switch (((q % 4) + 4) % 4) {
            case 0: c = 1; s = 0; return;
            case 1: c = 0; s = 1; return;
            case 2: c = -1; s = 0; return;
            case 3: c = 0; s = -1; return;
        }
    }
    const double rad = deg * std::numbers::pi / 180.0;
    c = std::cos(rad);
    s = std::sin(rad);
}

Tensor slice_image(const SliceBatch& b, int i) {
    Tensor out({b.height(), b.width()});
    for (int y = 0; y < b.height(); ++y)
        for (int x = 0; x < b.width(); ++x) out.at(y, x) = b.images.at(i, y, x, 0);
    return out;
}

Tensor slice_labels(const SliceBatch& b, int i) {
    Tensor out({b.height(), b.width(), kNumClasses});
    const std::int64_t n = out.size();
    std::copy(b.labels.data() + static_cast<std::int64_t>(i) * n,
              b.labels.data() + static_cast<std::int64_t>(i + 1) * n, out.data());
    return out;
}

void store_slice(SliceBatch& b, int i, const Tensor& image, const Tensor& labels) {
    for (int y = 0; y < b.height(); ++y)
        for (int x = 0; x < b.width(); ++x) b.images.at(i, y, x, 0) = image.at(y, x);
    std::copy(labels.data(), labels.data() + labels.size(),
              b.labels.data() + static_cast<std::int64_t>(i) * labels.size());
}

void warp_slice_pair(const warp::DeformationField& field, Tensor& image, Tensor& labels) {
    image = warp::warp_bilinear(image, field, 0.0f);
    labels = warp::warp_labels(labels, field);
}

}  // namespace

warp::DeformationField affine_field(const AffineParams& params, int h, int w) {
    double m00 = 1, m01 = 0, m10 = 0, m11 = 1;
    switch (params.mode) {
        case AffineMode::Identity:
            break;
        case AffineMode::RotateSmall: {
            double c, s;
            rotation_entries(params.angle_deg, c, s);
            m00 = c; m01 = -s; m10 = s; m11 = c;
            break;
        }
        case AffineMode::Rotate45N: {
            double c, s;
            rotation_entries(45.0 * params.n_quarter, c, s);
            m00 = c; m01 = -s; m10 = s; m11 = c;
            break;
        }
        case AffineMode::Scale: {
            const double inv = 1.0 / params.scale_factor;
            m00 = inv; m11 = inv;
            break;
        }
        case AffineMode::FlipX:
            m11 = -1;
            break;
    }
    const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
    auto field = warp::make_field(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dy = y - cy, dx = x - cx;
            const double sy = cy + m00 * dy + m01 * dx;
            const double sx = cx + m10 * dy + m11 * dx;
            field.displacements.at(y, x, 0) = static_cast<float>(sy - y);
            field.displacements.at(y, x, 1) = static_cast<float>(sx - x);
        }
    return field;
}

void apply_affine(const AffineParams& params, Tensor& image_hw, Tensor& labels_hw4) {
    if (params.mode == AffineMode::Identity) return;
    const auto field = affine_field(params, image_hw.dim(0), image_hw.dim(1));
    warp_slice_pair(field, image_hw, labels_hw4);
}

AffineParams draw_affine_params(Rng& rng) {
    AffineParams p;
    switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
        case 0: p.mode = AffineMode::Identity; break;
        case 1:
            p.mode = AffineMode::RotateSmall;
            p.angle_deg = std::uniform_real_distribution<double>(-15.0, 15.0)(rng);
            break;
        case 2:
            p.mode = AffineMode::Scale;
            p.scale_factor = std::uniform_real_distribution<double>(0.9, 1.1)(rng);
            break;
        case 3:
            p.mode = AffineMode::Rotate45N;
            p.n_quarter = std::uniform_int_distribution<int>(0, 8)(rng);
            break;
        case 4: p.mode = AffineMode::FlipX; break;
    }
    return p;
}

SliceBatch affine_augment(const SliceBatch& batch, std::uint64_t rng_seed) {
    SliceBatch out = batch;
    Rng rng(rng_seed);
    for (int i = 0; i < batch.batch(); ++i) {
        const AffineParams p = draw_affine_params(rng);
        if (p.mode == AffineMode::Identity) continue;
        Tensor img = slice_image(batch, i);
        Tensor lbl = slice_labels(batch, i);
        apply_affine(p, img, lbl);
        store_slice(out, i, img, lbl);
        out.provenance[static_cast<size_t>(i)].lineage += "/affine";
    }
    return out;
}

void apply_elastic_from_grid(const Tensor& coarse_3x3x2, Tensor& image_hw, Tensor& labels_hw4) {
    if (coarse_3x3x2.rank() != 3 || coarse_3x3x2.dim(2) != 2)
        throw ShapeMismatch("elastic coarse grid must be (gh,gw,2)");
    warp::DeformationField field{
        upscale_bicubic_grid(coarse_3x3x2, image_hw.dim(0), image_hw.dim(1))};
    warp_slice_pair(field, image_hw, labels_hw4);
}

SliceBatch random_elastic(const SliceBatch& batch, double sigma, std::uint64_t rng_seed) {
    if (sigma < 0) throw std::invalid_argument("sigma must be >= 0");
    SliceBatch out = batch;
    Rng rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (int i = 0; i < batch.batch(); ++i) {
        Tensor coarse({3, 3, 2});
        for (std::int64_t k = 0; k < coarse.size(); ++k)
            coarse[k] = sigma == 0.0 ? 0.0f : static_cast<float>(gauss(rng));
        Tensor img = slice_image(batch, i);
        Tensor lbl = slice_labels(batch, i);
        apply_elastic_from_grid(coarse, img, lbl);
        store_slice(out, i, img, lbl);
        out.provenance[static_cast<size_t>(i)].lineage += "/elastic";
    }
    return out;
}

void apply_contrast_brightness(Tensor& image_hw, double c, double b) {
    double mean = 0.0;
    for (std::int64_t i = 0; i < image_hw.size(); ++i) mean += image_hw[i];
    mean /= static_cast<double>(image_hw.size());
    for (std::int64_t i = 0; i < image_hw.size(); ++i)
        image_hw[i] = static_cast<float>((image_hw[i] - mean) * c + mean + b);
}

SliceBatch random_intensity(const SliceBatch& batch, std::uint64_t rng_seed, double c_lo,
                            double c_hi, double b_lo, double b_hi) {
    SliceBatch out = batch;
    Rng rng(rng_seed);
    for (int i = 0; i < batch.batch(); ++i) {
        const double c = std::uniform_real_distribution<double>(c_lo, c_hi)(rng);
        const double b = std::uniform_real_distribution<double>(b_lo, b_hi)(rng);
        Tensor img = slice_image(batch, i);
        apply_contrast_brightness(img, c, b);
        for (int y = 0; y < batch.height(); ++y)
            for (int x = 0; x < batch.width(); ++x) out.images.at(i, y, x, 0) = img.at(y, x);
        out.provenance[static_cast<size_t>(i)].lineage += "/intensity";
    }
    return out;
}

double sample_mixup_lambda(const MixupConfig& cfg, Rng& rng) {
    if (cfg.alpha <= 0) throw std::invalid_argument("mixup alpha must be > 0");
    std::gamma_distribution<double> gamma(cfg.alpha, 1.0);
    const double a = gamma(rng), b = gamma(rng);
    double lam = (a + b) > 0 ? a / (a + b) : 0.0;
    if (lam >= 1.0) lam = std::nextafter(1.0, 0.0);  // restrict to [0,1)
    return lam;
}

SliceBatch mixup_with_lambdas(const SliceBatch& batch_a, const SliceBatch& batch_b,
                              const std::vector<double>& lambdas) {
    if (!batch_a.images.same_shape(batch_b.images) || !batch_a.labels.same_shape(batch_b.labels))
        throw ShapeMismatch("mixup batches must be shape-compatible");
    if (lambdas.size() != static_cast<size_t>(batch_a.batch()))
        throw ShapeMismatch("one lambda per pair required");
    SliceBatch out = batch_a;
    const std::int64_t img_n = batch_a.images.size() / batch_a.batch();
    const std::int64_t lbl_n = batch_a.labels.size() / batch_a.batch();
    for (int i = 0; i < batch_a.batch(); ++i) {
        const float lam = static_cast<float>(lambdas[static_cast<size_t>(i)]);
        float* oi = out.images.data() + i * img_n;
        const float* ai = batch_a.images.data() + i * img_n;
        const float* bi = batch_b.images.data() + i * img_n;
        for (std::int64_t k = 0; k < img_n; ++k) oi[k] = lam * ai[k] + (1.0f - lam) * bi[k];
        float* ol = out.labels.data() + i * lbl_n;
        const float* al = batch_a.labels.data() + i * lbl_n;
        const float* bl = batch_b.labels.data() + i * lbl_n;
        for (std::int64_t k = 0; k < lbl_n; ++k) ol[k] = lam * al[k] + (1.0f - lam) * bl[k];
        auto& prov = out.provenance[static_cast<size_t>(i)];
        prov.lineage = "mixup(" + batch_a.provenance[static_cast<size_t>(i)].lineage + "," +
                       batch_b.provenance[static_cast<size_t>(i)].lineage + ")";
        prov.generated = true;
    }
    return out;
}

SliceBatch mixup(const SliceBatch& batch_a, const SliceBatch& batch_b, const MixupConfig& cfg,
                 std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    std::vector<double> lambdas(static_cast<size_t>(batch_a.batch()));
    for (auto& l : lambdas) l = sample_mixup_lambda(cfg, rng);
    return mixup_with_lambdas(batch_a, batch_b, lambdas);
}

}  // namespace taskaug::aug
