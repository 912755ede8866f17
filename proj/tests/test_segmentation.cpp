#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <iostream>

#include "helpers.hpp"
#include "taskaug/core/errors.hpp"
#include "taskaug/seg/dice.hpp"
#include "taskaug/seg/losses.hpp"
#include "taskaug/seg/unet.hpp"
#include "taskaug/seg/wce_kernel.hpp"

using namespace taskaug;
using testutil::grad_close;
using testutil::random_tensor;

namespace {
const seg::UNetWidths kTinyUNet{{4, 8, 8, 16}};
}

TEST_CASE("unet output matches input spatial dims with 4 class channels") {
    seg::SegmentationNetwork net(kTinyUNet);
    net.init(1);
    Tensor x = random_tensor({2, 32, 32, 1}, 2);
    Tensor logits = net.forward(x, nn::Mode::Train);
    CHECK(logits.shape() == std::vector<int>({2, 32, 32, 4}));

    Tensor zeros({1, 32, 32, 1});
    Tensor lz = net.forward(zeros, nn::Mode::Train);
    for (std::int64_t i = 0; i < lz.size(); ++i) CHECK(std::isfinite(lz[i]));
}

TEST_CASE("unet is approximately translation-equivariant (logged, not asserted)") {
    seg::SegmentationNetwork net(kTinyUNet);
    net.init(3);
    auto batch = testutil::phantom_batch(1, 64, 4);
    Tensor shifted({1, 64, 64, 1});
    const int shift = 32;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            shifted.at(0, y, x, 0) =
                batch.images.at(0, (y + shift) % 64, (x + shift) % 64, 0);
    Tensor a = net.forward(batch.images, nn::Mode::Eval, false);
    Tensor b = net.forward(shifted, nn::Mode::Eval, false);
    double num = 0, da = 0, db = 0, ma = 0, mb = 0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            for (int c = 0; c < 4; ++c) {
                const double va = a.at(0, (y + shift) % 64, (x + shift) % 64, c) - ma;
                const double vb = b.at(0, y, x, c) - mb;
                num += va * vb;
                da += va * va;
                db += vb * vb;
            }
    const double corr = num / std::sqrt(da * db);
    std::cout << "[probe] translation-equivariance correlation: " << corr << "\n";
    CHECK(std::isfinite(corr));
}

TEST_CASE("weighted cross-entropy analytic values") {
    const seg::ClassWeights w{};

    // saturated logits on the correct class
    auto batch = testutil::phantom_batch(1, 32, 5);
    Tensor logits({1, 32, 32, 4});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            for (int c = 0; c < 4; ++c)
                logits.at(0, y, x, c) = batch.labels.at(0, y, x, c) > 0.5f ? 30.0f : -30.0f;
    CHECK(seg::weighted_cross_entropy(logits, batch.labels, w, true) < 1e-3);

    // uniform logits, pure background target
    Tensor uniform({1, 8, 8, 4});
    Tensor bg({1, 8, 8, 4});
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) bg.at(0, y, x, 0) = 1.0f;
    // weight storage is float, so compare at float precision
    const double loss = seg::weighted_cross_entropy(uniform, bg, w, true);
    CHECK(loss == doctest::Approx(0.1 * std::log(4.0)).epsilon(1e-7));
    CHECK(std::abs(loss - 0.1 * std::log(4.0)) < 1e-6);
    CHECK(seg::weighted_cross_entropy(uniform, bg, w, false) == 0.0);
}

TEST_CASE("weighted cross-entropy is invariant to per-pixel logit shifts") {
    const seg::ClassWeights w{};
    Tensor logits = random_tensor({2, 8, 8, 4}, 6);
    Tensor target({2, 8, 8, 4});
    Rng rng(7);
    std::uniform_int_distribution<int> cls(0, 3);
    for (int n = 0; n < 2; ++n)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) target.at(n, y, x, cls(rng)) = 1.0f;
    const double base = seg::weighted_cross_entropy(logits, target, w, true);
    Tensor shifted = logits;
    Rng rng2(8);
    std::uniform_real_distribution<float> sh(-5.0f, 5.0f);
    for (int n = 0; n < 2; ++n)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                const float s = sh(rng2);
                for (int c = 0; c < 4; ++c) shifted.at(n, y, x, c) += s;
            }
    CHECK(seg::weighted_cross_entropy(shifted, target, w, true) ==
          doctest::Approx(base).epsilon(1e-6));
}

TEST_CASE("weighted cross-entropy gradients match finite differences (double kernel)") {
    const int pixels = 8 * 8;
    Rng rng(9);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<double> logits(pixels * 4), target(pixels * 4, 0.0);
    for (auto& v : logits) v = dist(rng);
    // soft targets on the simplex
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int p = 0; p < pixels; ++p) {
        double s = 0;
        for (int c = 0; c < 4; ++c) {
            target[static_cast<size_t>(p * 4 + c)] = u(rng);
            s += target[static_cast<size_t>(p * 4 + c)];
        }
        for (int c = 0; c < 4; ++c) target[static_cast<size_t>(p * 4 + c)] /= s;
    }
    const double w[4] = {0.1, 0.3, 0.3, 0.3};

    std::vector<double> d_logits(logits.size(), 0.0), d_target(logits.size(), 0.0);
    seg::detail::weighted_ce<double>(logits.data(), target.data(), w, pixels, 4, d_logits.data(),
                                     d_target.data());

    auto f_logits = [&](const std::vector<double>& z) {
        return seg::detail::weighted_ce<double>(z.data(), target.data(), w, pixels, 4);
    };
    auto num = testutil::numeric_gradient(f_logits, logits);
    for (size_t i = 0; i < logits.size(); ++i) CHECK(grad_close(d_logits[i], num[i]));

    auto f_target = [&](const std::vector<double>& t) {
        return seg::detail::weighted_ce<double>(logits.data(), t.data(), w, pixels, 4);
    };
    auto num_t = testutil::numeric_gradient(f_target, target);
    for (size_t i = 0; i < target.size(); ++i) CHECK(grad_close(d_target[i], num_t[i]));
}

TEST_CASE("dice score analytic cases and counting oracle") {
    using data::LabelVolume;
    LabelVolume a(2, 10, 10), b(2, 10, 10);
    // identical masks
    for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 10; ++x) a.at(z, y, x) = b.at(z, y, x) = data::kLV;
    CHECK(seg::dice_score(a, b, data::kLV) == 1.0);

    // P = left half of G's full region: 2*100/(100+200)
    LabelVolume p(2, 10, 10), g(2, 10, 10);
    for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 10; ++x) {
                g.at(z, y, x) = data::kMyo;
                if (x < 5) p.at(z, y, x) = data::kMyo;
            }
    CHECK(seg::dice_score(p, g, data::kMyo) == doctest::Approx(2.0 * 100 / 300).epsilon(1e-12));

    // disjoint nonempty masks
    LabelVolume d1(1, 4, 4), d2(1, 4, 4);
    d1.at(0, 0, 0) = data::kRV;
    d2.at(0, 3, 3) = data::kRV;
    CHECK(seg::dice_score(d1, d2, data::kRV) == 0.0);

    // both empty
    LabelVolume e1(1, 4, 4), e2(1, 4, 4);
    CHECK(seg::dice_score(e1, e2, data::kRV) == 1.0);

    // 50 random pairs against a counting oracle, exact
    Rng rng(11);
    std::uniform_int_distribution<int> lab(0, 3);
    for (int trial = 0; trial < 50; ++trial) {
        LabelVolume x(4, 16, 16), y(4, 16, 16);
        for (auto& v : x.values) v = static_cast<std::uint8_t>(lab(rng));
        for (auto& v : y.values) v = static_cast<std::uint8_t>(lab(rng));
        for (int structure : {data::kRV, data::kMyo, data::kLV}) {
            std::int64_t inter = 0, nx = 0, ny = 0;
            for (size_t i = 0; i < x.values.size(); ++i) {
                inter += (x.values[i] == structure) && (y.values[i] == structure);
                nx += x.values[i] == structure;
                ny += y.values[i] == structure;
            }
            const double expect = (nx + ny) == 0 ? 1.0 : 2.0 * inter / static_cast<double>(nx + ny);
            CHECK(seg::dice_score(x, y, structure) == expect);
        }
    }
}

TEST_CASE("dice is symmetric and invariant to slice reordering") {
    Rng rng(12);
    std::uniform_int_distribution<int> lab(0, 3);
    data::LabelVolume a(3, 8, 8), b(3, 8, 8);
    for (auto& v : a.values) v = static_cast<std::uint8_t>(lab(rng));
    for (auto& v : b.values) v = static_cast<std::uint8_t>(lab(rng));
    for (int s : {data::kRV, data::kMyo, data::kLV})
        CHECK(seg::dice_score(a, b, s) == seg::dice_score(b, a, s));

    // reverse slice order of both volumes
    data::LabelVolume ar(3, 8, 8), br(3, 8, 8);
    for (int z = 0; z < 3; ++z)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                ar.at(z, y, x) = a.at(2 - z, y, x);
                br.at(z, y, x) = b.at(2 - z, y, x);
            }
    for (int s : {data::kRV, data::kMyo, data::kLV})
        CHECK(seg::dice_score(ar, br, s) == seg::dice_score(a, b, s));

    data::LabelVolume wrong(2, 8, 8);
    CHECK_THROWS_AS(seg::dice_score(a, wrong, data::kRV), ShapeMismatch);
}

TEST_CASE("unet backward produces finite gradients that move the loss") {
    seg::SegmentationNetwork net(kTinyUNet);
    net.init(21);
    auto batch = testutil::phantom_batch(2, 32, 22);
    const seg::ClassWeights w{};

    Tensor logits = net.forward(batch.images, nn::Mode::Train);
    const double before = seg::weighted_cross_entropy(logits, batch.labels, w, false);
    Tensor d = seg::weighted_cross_entropy_backward(logits, batch.labels, w, false);
    auto params = net.params();
    nn::zero_grads(params);
    net.backward(d, false);
    double grad_norm = 0;
    for (auto* p : params)
        for (std::int64_t i = 0; i < p->grad.size(); ++i)
            grad_norm += static_cast<double>(p->grad[i]) * p->grad[i];
    CHECK(grad_norm > 0.0);
    CHECK(std::isfinite(grad_norm));

    // a short Adam descent reduces the loss
    nn::Adam adam(1e-3f);
    for (int it = 0; it < 20; ++it) {
        nn::zero_grads(params);
        Tensor lg = net.forward(batch.images, nn::Mode::Train);
        Tensor dd = seg::weighted_cross_entropy_backward(lg, batch.labels, w, false);
        net.backward(dd, false);
        adam.step(params);
    }
    Tensor after_logits = net.forward(batch.images, nn::Mode::Train);
    const double after = seg::weighted_cross_entropy(after_logits, batch.labels, w, false);
    CHECK(after < before);
}
