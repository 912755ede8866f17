#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "helpers.hpp"
#include "taskaug/aug/classic.hpp"
#include "taskaug/core/errors.hpp"
#include "taskaug/core/image_ops.hpp"

using namespace taskaug;
using aug::AffineMode;
using aug::AffineParams;

namespace {

bool batches_identical(const data::SliceBatch& a, const data::SliceBatch& b, float tol = 0.0f) {
    return testutil::tensors_equal(a.images, b.images, tol) &&
           testutil::tensors_equal(a.labels, b.labels, tol);
}

}  // namespace

TEST_CASE("identity affine leaves slices bit-exact") {
    auto batch = testutil::phantom_batch(2, 32, 1);
    Tensor img({32, 32});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(y, x) = batch.images.at(0, y, x, 0);
    Tensor img_before = img;
    Tensor lbl({32, 32, 4});
    std::copy(batch.labels.data(), batch.labels.data() + lbl.size(), lbl.data());
    Tensor lbl_before = lbl;
    aug::apply_affine(AffineParams{}, img, lbl);
    CHECK(testutil::tensors_equal(img, img_before));
    CHECK(testutil::tensors_equal(lbl, lbl_before));
}

TEST_CASE("x-flip applied twice is the identity") {
    auto batch = testutil::phantom_batch(1, 32, 2);
    Tensor img({32, 32});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(y, x) = batch.images.at(0, y, x, 0);
    Tensor lbl({32, 32, 4});
    std::copy(batch.labels.data(), batch.labels.data() + lbl.size(), lbl.data());
    Tensor img0 = img, lbl0 = lbl;
    AffineParams flip{AffineMode::FlipX};
    aug::apply_affine(flip, img, lbl);
    CHECK_FALSE(testutil::tensors_equal(img, img0));
    aug::apply_affine(flip, img, lbl);
    CHECK(testutil::tensors_equal(img, img0));
    CHECK(testutil::tensors_equal(lbl, lbl0));
}

TEST_CASE("90-degree rotation matches the index-permutation oracle exactly") {
    // asymmetric pattern
    Tensor img({32, 32});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(y, x) = static_cast<float>(y * 37 + x * 5 % 13);
    Tensor lbl({32, 32, 4});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) lbl.at(y, x, (y + x) % 4) = 1.0f;

    Tensor rimg = img, rlbl = lbl;
    AffineParams rot{};
    rot.mode = AffineMode::Rotate45N;
    rot.n_quarter = 2;  // 90 degrees
    aug::apply_affine(rot, rimg, rlbl);

    // oracle: source position = center + R(90)*(p - center), i.e. the index
    // permutation (y,x) <- (H-1-x, y)
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const int sy = 31 - x;
            const int sx = y;
            CHECK(rimg.at(y, x) == img.at(sy, sx));
            for (int c = 0; c < 4; ++c) CHECK(rlbl.at(y, x, c) == lbl.at(sy, sx, c));
        }
}

TEST_CASE("affine_augment preserves the label simplex and is deterministic") {
    auto batch = testutil::phantom_batch(8, 32, 3);
    auto out1 = aug::affine_augment(batch, 1234);
    auto out2 = aug::affine_augment(batch, 1234);
    CHECK(batches_identical(out1, out2));
    CHECK_NOTHROW(data::check_batch(out1, 1e-5f));
    auto out3 = aug::affine_augment(batch, 99);
    CHECK_FALSE(batches_identical(out1, out3));
}

TEST_CASE("elastic with sigma 0 is the identity") {
    auto batch = testutil::phantom_batch(3, 32, 4);
    auto out = aug::random_elastic(batch, 0.0, 5);
    CHECK(batches_identical(out, batch, 1e-6f));
}

TEST_CASE("bicubic upscale of a constant grid is a uniform translation") {
    Tensor coarse({3, 3, 2});
    for (int i = 0; i < 9; ++i) {
        coarse[2 * i] = 0.0f;      // dy
        coarse[2 * i + 1] = 3.0f;  // dx
    }
    auto batch = testutil::phantom_batch(1, 32, 6);
    Tensor img({32, 32});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(y, x) = batch.images.at(0, y, x, 0);
    Tensor lbl({32, 32, 4});
    std::copy(batch.labels.data(), batch.labels.data() + lbl.size(), lbl.data());
    Tensor orig = img;
    aug::apply_elastic_from_grid(coarse, img, lbl);
    // interior pixels: exact 3-pixel shift in x
    for (int y = 2; y < 30; ++y)
        for (int x = 2; x < 27; ++x)
            CHECK(img.at(y, x) == doctest::Approx(orig.at(y, x + 3)).epsilon(1e-4));
}

TEST_CASE("dense elastic field magnitude stays below 1.5x the coarse magnitude") {
    Rng rng(7);
    std::normal_distribution<float> g(0.0f, 10.0f);
    for (int trial = 0; trial < 200; ++trial) {
        Tensor coarse({3, 3, 2});
        for (std::int64_t i = 0; i < coarse.size(); ++i) coarse[i] = g(rng);
        Tensor dense = upscale_bicubic_grid(coarse, 224, 224);
        CHECK(dense.shape() == std::vector<int>({224, 224, 2}));
        CHECK(max_abs(dense) <= 1.5 * max_abs(coarse));
    }
}

TEST_CASE("random_elastic keeps labels on the simplex and is deterministic") {
    auto batch = testutil::phantom_batch(4, 32, 8);
    auto out1 = aug::random_elastic(batch, 10.0, 11);
    auto out2 = aug::random_elastic(batch, 10.0, 11);
    CHECK(batches_identical(out1, out2));
    CHECK_NOTHROW(data::check_batch(out1, 1e-5f));
}

TEST_CASE("contrast/brightness: identity, mean preservation, hand-applied formula") {
    Tensor img = testutil::random_tensor({16, 16}, 21, 0.0f, 1.0f);
    Tensor same = img;
    aug::apply_contrast_brightness(same, 1.0, 0.0);
    for (std::int64_t i = 0; i < img.size(); ++i) CHECK(std::abs(same[i] - img[i]) < 1e-6f);

    Tensor contrasted = img;
    aug::apply_contrast_brightness(contrasted, 1.17, 0.0);
    double m0 = 0, m1 = 0;
    for (std::int64_t i = 0; i < img.size(); ++i) {
        m0 += img[i];
        m1 += contrasted[i];
    }
    CHECK(m1 / img.size() == doctest::Approx(m0 / img.size()).epsilon(1e-6));

    Tensor small({4, 4});
    for (int i = 0; i < 16; ++i) small[i] = static_cast<float>(i) / 16.0f;
    double mean = 0;
    for (int i = 0; i < 16; ++i) mean += small[i];
    mean /= 16.0;
    Tensor expect({4, 4});
    for (int i = 0; i < 16; ++i)
        expect[i] = static_cast<float>((small[i] - mean) * 0.8 + mean + 0.1);
    aug::apply_contrast_brightness(small, 0.8, 0.1);
    for (int i = 0; i < 16; ++i) CHECK(small[i] == doctest::Approx(expect[i]).epsilon(1e-6));
}

TEST_CASE("random_intensity leaves labels untouched") {
    auto batch = testutil::phantom_batch(4, 32, 22);
    auto out = aug::random_intensity(batch, 23);
    CHECK(testutil::tensors_equal(out.labels, batch.labels));
    CHECK_FALSE(testutil::tensors_equal(out.images, batch.images));
    auto out2 = aug::random_intensity(batch, 23);
    CHECK(batches_identical(out, out2));
}

TEST_CASE("mixup endpoints and convexity") {
    auto a = testutil::phantom_batch(3, 32, 31);
    auto b = testutil::phantom_batch(3, 32, 32);

    auto all_a = aug::mixup_with_lambdas(a, b, {1.0, 1.0, 1.0});
    CHECK(testutil::tensors_equal(all_a.images, a.images));
    CHECK(testutil::tensors_equal(all_a.labels, a.labels));

    auto half = aug::mixup_with_lambdas(a, b, {0.5, 0.5, 0.5});
    for (std::int64_t i = 0; i < half.images.size(); ++i)
        CHECK(half.images[i] == doctest::Approx(0.5f * (a.images[i] + b.images[i])));
    CHECK_NOTHROW(data::check_batch(half, 1e-5f));
    for (const auto& p : half.provenance) CHECK(p.generated);
}

TEST_CASE("mixup lambda sampling: Beta symmetry and range") {
    aug::MixupConfig cfg;  // alpha = 0.2
    Rng rng(41);
    const int n = 10000;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        const double lam = aug::sample_mixup_lambda(cfg, rng);
        CHECK(lam >= 0.0);
        CHECK(lam < 1.0);
        sum += lam;
    }
    const double mean = sum / n;
    // Var(Beta(a,a)) = 1/(4(2a+1)); three standard errors around 1/2
    const double se = std::sqrt(1.0 / (4.0 * (2.0 * cfg.alpha + 1.0)) / n);
    CHECK(std::abs(mean - 0.5) < 3.0 * se);

    CHECK_THROWS(aug::sample_mixup_lambda(aug::MixupConfig{0.0}, rng));
}

TEST_CASE("mixup rejects shape mismatches and is deterministic per seed") {
    auto a = testutil::phantom_batch(3, 32, 33);
    auto b = testutil::phantom_batch(2, 32, 34);
    CHECK_THROWS_AS(aug::mixup(a, b, aug::MixupConfig{}, 1), ShapeMismatch);

    auto c = testutil::phantom_batch(3, 32, 35);
    auto m1 = aug::mixup(a, c, aug::MixupConfig{}, 77);
    auto m2 = aug::mixup(a, c, aug::MixupConfig{}, 77);
    CHECK(testutil::tensors_equal(m1.images, m2.images));
    CHECK(testutil::tensors_equal(m1.labels, m2.labels));
}

TEST_CASE("geometric augmenters warp image and labels with the same map") {
    // encode one label channel as the image; both must transform identically
    auto batch = testutil::phantom_batch(1, 32, 35);
    Tensor img({32, 32});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(y, x) = batch.labels.at(0, y, x, 2);
    Tensor lbl({32, 32, 4});
    std::copy(batch.labels.data(), batch.labels.data() + lbl.size(), lbl.data());

    AffineParams rot{};
    rot.mode = AffineMode::RotateSmall;
    rot.angle_deg = 9.5;
    Tensor rimg = img, rlbl = lbl;
    aug::apply_affine(rot, rimg, rlbl);
    // the label channels are renormalized; compare against the raw warp of
    // the same channel where the pixel has full mass
    for (int y = 1; y < 31; ++y)
        for (int x = 1; x < 31; ++x) {
            float s = 0;
            for (int c = 0; c < 4; ++c) s += rlbl.at(y, x, c);
            if (std::abs(s - 1.0f) < 1e-6f)
                CHECK(std::abs(rlbl.at(y, x, 2) * s - rimg.at(y, x)) < 1e-4f);
        }
}
