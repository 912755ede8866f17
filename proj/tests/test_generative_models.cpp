#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "helpers.hpp"
#include "taskaug/gan/discriminator.hpp"
#include "taskaug/gan/generator.hpp"
#include "taskaug/gan/losses.hpp"
#include "taskaug/seg/dice.hpp"
#include "taskaug/seg/losses.hpp"
#include "taskaug/seg/unet.hpp"
#include "taskaug/warp/warp.hpp"

using namespace taskaug;
using testutil::random_tensor;

namespace {

const gan::GenWidths kTinyGen{{4, 4}, {8, 8, 8, 4, 4}, {8, 8, 4}};
const gan::DiscWidths kTinyDisc{{4, 8, 8, 8, 8}, {16, 8}};

Tensor logits_for_prob_real(int n, double p_real) {
    // softmax([0, logit]) puts p_real on class 1
    Tensor t({n, 2});
    const double logit = std::log(p_real / (1.0 - p_real));
    for (int i = 0; i < n; ++i) {
        t.at(i, 0) = 0.0f;
        t.at(i, 1) = static_cast<float>(logit);
    }
    return t;
}

}  // namespace

TEST_CASE("deformation generator emits (N,H,W,2); intensity stays strictly inside (-1,1)") {
    gan::GeneratorNetwork gv(gan::GeneratorKind::Deformation, 32, kTinyGen, 16);
    gv.init(1);
    gan::GeneratorNetwork gi(gan::GeneratorKind::Intensity, 32, kTinyGen, 16);
    gi.init(2);

    Tensor imgs = random_tensor({3, 32, 32, 1}, 3, 0.0f, 1.0f);
    Rng zr(4);
    Tensor z = gan::sample_z(3, 16, zr);

    Tensor field = gv.forward(imgs, z, nn::Mode::Train);
    CHECK(field.shape() == std::vector<int>({3, 32, 32, 2}));

    Tensor mask = gi.forward(imgs, z, nn::Mode::Train);
    CHECK(mask.shape() == std::vector<int>({3, 32, 32, 1}));
    for (std::int64_t i = 0; i < mask.size(); ++i) {
        CHECK(mask[i] > -1.0f);
        CHECK(mask[i] < 1.0f);
    }
}

TEST_CASE("generator inference is deterministic for a fixed (image, z)") {
    gan::GeneratorNetwork g(gan::GeneratorKind::Deformation, 32, kTinyGen, 16);
    g.init(5);
    Tensor imgs = random_tensor({2, 32, 32, 1}, 6);
    Rng zr(7);
    Tensor z = gan::sample_z(2, 16, zr);
    // settle running stats, then freeze
    g.forward(imgs, z, nn::Mode::Train, true);
    Tensor a = g.forward(imgs, z, nn::Mode::Eval, false);
    Tensor b = g.forward(imgs, z, nn::Mode::Eval, false);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<size_t>(a.size())) == 0);
}

TEST_CASE("synthesize_pair: intensity keeps labels bit-identical") {
    gan::GeneratorNetwork gi(gan::GeneratorKind::Intensity, 32, kTinyGen, 16);
    gi.init(8);
    auto batch = testutil::phantom_batch(1, 32, 9);
    Tensor img({32, 32});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(y, x) = batch.images.at(0, y, x, 0);
    Tensor lbl({32, 32, 4});
    std::copy(batch.labels.data(), batch.labels.data() + lbl.size(), lbl.data());
    Rng zr(10);
    Tensor z = gan::sample_z(1, 16, zr);
    auto [x_g, y_g] = gan::synthesize_pair(gi, img, lbl, z);
    CHECK(std::memcmp(y_g.data(), lbl.data(), sizeof(float) * static_cast<size_t>(lbl.size())) ==
          0);
    CHECK_FALSE(testutil::tensors_equal(x_g, img));
}

TEST_CASE("zero deformation leaves the synthesized pair unchanged") {
    // the deformation path of synthesize_pair with a forced zero field
    auto batch = testutil::phantom_batch(1, 32, 11);
    Tensor img({32, 32});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(y, x) = batch.images.at(0, y, x, 0);
    Tensor lbl({32, 32, 4});
    std::copy(batch.labels.data(), batch.labels.data() + lbl.size(), lbl.data());
    auto zero = warp::make_field(32, 32);
    Tensor wi = warp::warp_bilinear(img, zero);
    Tensor wl = warp::warp_labels(lbl, zero);
    CHECK(testutil::tensors_equal(wi, img, 1e-6f));
    CHECK(testutil::tensors_equal(wl, lbl, 1e-6f));
}

TEST_CASE("deformation synthesize_pair stays close to a hard-label warp oracle") {
    gan::GeneratorNetwork gv(gan::GeneratorKind::Deformation, 32, kTinyGen, 16);
    gv.init(12);
    auto batch = testutil::phantom_batch(1, 32, 13);
    Tensor img({32, 32});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(y, x) = batch.images.at(0, y, x, 0);
    Tensor lbl({32, 32, 4});
    std::copy(batch.labels.data(), batch.labels.data() + lbl.size(), lbl.data());
    Rng zr(14);
    Tensor z = gan::sample_z(1, 16, zr);

    auto [x_g, y_g] = gan::synthesize_pair(gv, img, lbl, z, nn::Mode::Train);

    // recover the field the generator produced (deterministic repeat)
    Tensor batch_img({1, 32, 32, 1});
    std::copy(img.data(), img.data() + img.size(), batch_img.data());
    Tensor field = gv.forward(batch_img, z.reshaped({1, 16}), nn::Mode::Train);

    // oracle: nearest-neighbour warp of hard labels
    data::LabelVolume oracle(1, 32, 32), predicted(1, 32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const double sy = y + field.at(0, y, x, 0);
            const double sx = x + field.at(0, y, x, 1);
            const int ny = static_cast<int>(std::lround(sy));
            const int nx = static_cast<int>(std::lround(sx));
            int cls = 0;
            if (ny >= 0 && ny < 32 && nx >= 0 && nx < 32) {
                float best = -1;
                for (int c = 0; c < 4; ++c)
                    if (lbl.at(ny, nx, c) > best) {
                        best = lbl.at(ny, nx, c);
                        cls = c;
                    }
            }
            oracle.at(0, y, x) = static_cast<std::uint8_t>(cls);
            float best = -1;
            int pcls = 0;
            for (int c = 0; c < 4; ++c)
                if (y_g.at(y, x, c) > best) {
                    best = y_g.at(y, x, c);
                    pcls = c;
                }
            predicted.at(0, y, x) = static_cast<std::uint8_t>(pcls);
        }
    for (int structure : {data::kRV, data::kMyo, data::kLV})
        CHECK(seg::dice_score(predicted, oracle, structure) >= 0.95);
}

TEST_CASE("generator loss: ablation zero, magnitude value, and saturation clamp") {
    const Tensor dummy_logits({2, 2});

    gan::AugmentorLossWeights off{0.0, 0.0};
    CHECK(gan::generator_loss(dummy_logits, random_tensor({2, 8, 8, 2}, 15), off) == 0.0);

    gan::AugmentorLossWeights mag_only{0.0, 1e-3};
    Tensor half({224, 224, 2}, 0.5f);
    const double expect = -1e-3 * (224.0 * 224.0 * 2.0 * 0.5);
    CHECK(gan::generator_loss(dummy_logits, half, mag_only) ==
          doctest::Approx(expect).epsilon(1e-12));
    CHECK(gan::generator_loss(dummy_logits, half, mag_only) == doctest::Approx(-50.176));

    // discriminator fully fooled: p_real ~ 1 -> clamped log floor, not -inf
    gan::AugmentorLossWeights adv_only{1.0, 0.0};
    Tensor fooled({4, 2});
    for (int i = 0; i < 4; ++i) {
        fooled.at(i, 0) = -60.0f;
        fooled.at(i, 1) = 60.0f;
    }
    const double loss = gan::generator_loss(fooled, half, adv_only);
    CHECK(std::isfinite(loss));
    CHECK(loss == doctest::Approx(std::log(1e-12)).epsilon(1e-9));
}

TEST_CASE("discriminator loss analytic values and softmax oracle") {
    // perfect discriminator
    Tensor real = logits_for_prob_real(4, 1.0 - 1e-9);
    Tensor fake = logits_for_prob_real(4, 1e-9);
    CHECK(gan::discriminator_loss(real, fake) < 1e-6);

    // chance: p = 0.5 on both
    Tensor chance({4, 2});
    CHECK(gan::discriminator_loss(chance, chance) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));

    // random logits vs a direct softmax/log oracle
    Tensor r = random_tensor({6, 2}, 16, -3.0f, 3.0f);
    Tensor f = random_tensor({6, 2}, 17, -3.0f, 3.0f);
    double expect = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double pr = std::exp(r.at(i, 1)) / (std::exp(r.at(i, 0)) + std::exp(r.at(i, 1)));
        const double pf = std::exp(f.at(i, 0)) / (std::exp(f.at(i, 0)) + std::exp(f.at(i, 1)));
        expect += -std::log(pr) / 6.0 - std::log(pf) / 6.0;
    }
    CHECK(gan::discriminator_loss(r, f) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("discriminator loss is invariant to within-batch order") {
    Tensor real = random_tensor({8, 2}, 18);
    Tensor fake = random_tensor({8, 2}, 19);
    Tensor real_perm({8, 2});
    for (int i = 0; i < 8; ++i) {
        real_perm.at(i, 0) = real.at(7 - i, 0);
        real_perm.at(i, 1) = real.at(7 - i, 1);
    }
    CHECK(gan::discriminator_loss(real, fake) ==
          doctest::Approx(gan::discriminator_loss(real_perm, fake)).epsilon(1e-12));
}

TEST_CASE("magnitude term gradient is -lambda * sign(field)") {
    Tensor field({4, 4, 2});
    Rng rng(20);
    std::uniform_real_distribution<float> d(-2.0f, 2.0f);
    for (std::int64_t i = 0; i < field.size(); ++i) field[i] = d(rng);
    field[3] = 0.0f;
    const double lambda = 1e-3;
    Tensor g = gan::magnitude_term_backward(field, lambda);
    for (std::int64_t i = 0; i < field.size(); ++i) {
        if (field[i] > 0) CHECK(g[i] == doctest::Approx(-lambda));
        else if (field[i] < 0) CHECK(g[i] == doctest::Approx(lambda));
        else CHECK(g[i] == 0.0f);
    }
}

TEST_CASE("adversarial fool term pushes fake logits toward 'real'") {
    Tensor fake = random_tensor({4, 2}, 21);
    Tensor d = gan::adversarial_fool_term_backward(fake, 1.0);
    // minimizing the term raises the real logit: gradient on class 1 < 0
    for (int i = 0; i < 4; ++i) CHECK(d.at(i, 1) < 0.0f);
}

TEST_CASE("discriminator forward/backward shapes and input gradients") {
    gan::DiscriminatorNetwork disc(32, kTinyDisc);
    disc.init(22);
    Tensor imgs = random_tensor({4, 32, 32, 1}, 23);
    Tensor logits = disc.forward(imgs, nn::Mode::Train);
    CHECK(logits.shape() == std::vector<int>({4, 2}));
    Tensor dl = random_tensor({4, 2}, 24);
    auto params = disc.params();
    nn::zero_grads(params);
    Tensor dx = disc.backward(dl, true);
    CHECK(dx.shape() == imgs.shape());
    double norm = 0;
    for (std::int64_t i = 0; i < dx.size(); ++i) norm += std::abs(dx[i]);
    CHECK(norm > 0.0);
}

TEST_CASE("task loss reaches deformation generator parameters through the warp") {
    gan::GeneratorNetwork gv(gan::GeneratorKind::Deformation, 32, kTinyGen, 16);
    gv.init(25);
    seg::SegmentationNetwork s(seg::UNetWidths{{4, 8, 8, 16}});
    s.init(26);

    auto src = testutil::phantom_batch(2, 32, 27);
    Rng zr(28);
    Tensor z = gan::sample_z(2, 16, zr);
    Tensor fields = gv.forward(src.images, z, nn::Mode::Train);

    // synthesize pairs and run the task loss on them
    Tensor x_g(src.images.shape()), y_g(src.labels.shape());
    for (int i = 0; i < 2; ++i) {
        Tensor f({32, 32, 2}), img({32, 32}), lbl({32, 32, 4});
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                f.at(y, x, 0) = fields.at(i, y, x, 0);
                f.at(y, x, 1) = fields.at(i, y, x, 1);
                img.at(y, x) = src.images.at(i, y, x, 0);
                for (int c = 0; c < 4; ++c) lbl.at(y, x, c) = src.labels.at(i, y, x, c);
            }
        warp::DeformationField field{f};
        Tensor wi = warp::warp_bilinear(img, field);
        Tensor wl = warp::warp_labels(lbl, field);
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                x_g.at(i, y, x, 0) = wi.at(y, x);
                for (int c = 0; c < 4; ++c) y_g.at(i, y, x, c) = wl.at(y, x, c);
            }
    }

    Tensor logits = s.forward(x_g, nn::Mode::Train);
    const seg::ClassWeights w{};
    Tensor d_tgt;
    Tensor d_logits = seg::weighted_cross_entropy_backward(logits, y_g, w, true, &d_tgt);
    Tensor d_xg = s.backward(d_logits, true);

    Tensor d_fields(fields.shape());
    for (int i = 0; i < 2; ++i) {
        Tensor f({32, 32, 2}), img({32, 32}), lbl({32, 32, 4}), dxi({32, 32}), dyi({32, 32, 4});
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                f.at(y, x, 0) = fields.at(i, y, x, 0);
                f.at(y, x, 1) = fields.at(i, y, x, 1);
                img.at(y, x) = src.images.at(i, y, x, 0);
                dxi.at(y, x) = d_xg.at(i, y, x, 0);
                for (int c = 0; c < 4; ++c) {
                    lbl.at(y, x, c) = src.labels.at(i, y, x, c);
                    dyi.at(y, x, c) = d_tgt.at(i, y, x, c);
                }
            }
        warp::DeformationField field{f};
        auto wg = warp::warp_bilinear_backward(img, field, dxi);
        Tensor dfl = warp::warp_labels_backward_field(lbl, field, dyi);
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                d_fields.at(i, y, x, 0) = wg.d_field.at(y, x, 0) + dfl.at(y, x, 0);
                d_fields.at(i, y, x, 1) = wg.d_field.at(y, x, 1) + dfl.at(y, x, 1);
            }
    }

    auto params = gv.params();
    nn::zero_grads(params);
    gv.backward(d_fields);
    double norm = 0;
    for (auto* p : params)
        for (std::int64_t i = 0; i < p->grad.size(); ++i)
            norm += static_cast<double>(p->grad[i]) * p->grad[i];
    CHECK(norm > 0.0);
}
