#include "taskaug/seg/unet.hpp"

#include "taskaug/core/errors.hpp"
#include "taskaug/data/volume.hpp"

namespace taskaug::seg {

using nn::ConvBNRelu;

SegmentationNetwork::SegmentationNetwork(UNetWidths widths) : widths_(widths) {
    const auto& w = widths_.enc;
    int in_ch = 1;
    for (int i = 0; i < 4; ++i) {
        const std::string base = "enc" + std::to_string(i + 1);
        enc_.push_back(std::make_unique<ConvBNRelu>(base + ".a", in_ch, w[i]));
        enc_.push_back(std::make_unique<ConvBNRelu>(base + ".b", w[i], w[i]));
        in_ch = w[i];
    }
    // Decoder block j consumes upsampled features + skip from encoder 4-j.
    const std::array<int, 4> dw{w[2], w[1], w[0], w[0]};
    int ch = w[3];
    for (int j = 0; j < 4; ++j) {
        const std::string base = "dec" + std::to_string(j + 1);
        const int skip = w[3 - j];
        dec_.push_back(std::make_unique<ConvBNRelu>(base + ".a", ch + skip, dw[j]));
        dec_.push_back(std::make_unique<ConvBNRelu>(base + ".b", dw[j], dw[j]));
        ch = dw[j];
    }
    head_ = std::make_unique<nn::Conv2D>("head", ch, data::kNumClasses, 3);
}

void SegmentationNetwork::init(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& b : enc_) b->init(rng);
    for (auto& b : dec_) b->init(rng);
    head_->init_he(rng);
    // background-prior bias: an untrained net predicts background, so classes
    // that carry no loss weight while training the segmenter alone do not
    // leak into unsupervised regions
    head_->set_bias(data::kBackground, 2.0f);
}

Tensor SegmentationNetwork::forward(const Tensor& images, nn::Mode mode, bool update_running) {
    if (images.rank() != 4 || images.dim(3) != 1)
        throw ShapeMismatch("SegmentationNetwork expects (N,H,W,1)");
    if (images.dim(1) % 16 != 0 || images.dim(2) % 16 != 0)
        throw ShapeMismatch("input dims must be divisible by 16");
    Tensor x = images;
    for (int i = 0; i < 4; ++i) {
        x = enc_[static_cast<size_t>(2 * i)]->forward(x, mode, update_running);
        x = enc_[static_cast<size_t>(2 * i + 1)]->forward(x, mode, update_running);
        skips_[static_cast<size_t>(i)] = x;
        skip_ch_[static_cast<size_t>(i)] = x.dim(3);
        x = pool_[static_cast<size_t>(i)].forward(x);
    }
    for (int j = 0; j < 4; ++j) {
        x = up_[static_cast<size_t>(j)].forward(x);
        x = nn::concat_channels(x, skips_[static_cast<size_t>(3 - j)]);
        x = dec_[static_cast<size_t>(2 * j)]->forward(x, mode, update_running);
        x = dec_[static_cast<size_t>(2 * j + 1)]->forward(x, mode, update_running);
    }
    return head_->forward(x);
}

Tensor SegmentationNetwork::backward(const Tensor& d_logits, bool want_dx) {
    Tensor d = head_->backward(d_logits);
    std::array<Tensor, 4> d_skips;
    for (int j = 3; j >= 0; --j) {
        d = dec_[static_cast<size_t>(2 * j + 1)]->backward(d);
        d = dec_[static_cast<size_t>(2 * j)]->backward(d);
        Tensor d_up, d_skip;
        const int up_ch = d.dim(3) - skip_ch_[static_cast<size_t>(3 - j)];
        nn::split_channels(d, up_ch, d_up, d_skip);
        d_skips[static_cast<size_t>(3 - j)] = std::move(d_skip);
        d = up_[static_cast<size_t>(j)].backward(d_up);
    }
    for (int i = 3; i >= 0; --i) {
        Tensor d_out = pool_[static_cast<size_t>(i)].backward(d);
        const Tensor& ds = d_skips[static_cast<size_t>(i)];
        for (std::int64_t k = 0; k < d_out.size(); ++k) d_out[k] += ds[k];
        const bool need_dx = want_dx || i > 0;
        d = enc_[static_cast<size_t>(2 * i + 1)]->backward(d_out);
        d = enc_[static_cast<size_t>(2 * i)]->backward(d, need_dx);
    }
    return d;
}

std::vector<nn::Param*> SegmentationNetwork::params() {
    std::vector<nn::Param*> out;
    for (auto& b : enc_) b->collect(out);
    for (auto& b : dec_) b->collect(out);
    head_->collect(out);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> SegmentationNetwork::state_tensors() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (nn::Param* p : params()) out.emplace_back(p->name, &p->value);
    for (auto& b : enc_) b->state(out);
    for (auto& b : dec_) b->state(out);
    return out;
}

}  // namespace taskaug::seg
