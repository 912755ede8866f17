#pragma once

#include <array>
#include <memory>

#include "taskaug/nn/adam.hpp"
#include "taskaug/nn/blocks.hpp"

namespace taskaug::seg {

struct UNetWidths {
    std::array<int, 4> enc{64, 128, 256, 512};
};

// U-Net: 4 encoder blocks (2x conv3x3 + max-pool), 4 decoder blocks (x2
// bilinear upsample + skip concatenation + 2x conv3x3), batch-norm + ReLU
// everywhere except the final 4-class logit conv. Decoder widths mirror the
// encoder. Input dims must be divisible by 16.
class SegmentationNetwork {
public:
    explicit SegmentationNetwork(UNetWidths widths = {});

    void init(std::uint64_t seed);

    // (N,H,W,1) -> (N,H,W,4) logits.
    Tensor forward(const Tensor& images, nn::Mode mode, bool update_running = true);
    // Accumulates parameter grads; returns d(loss)/d(images) when requested.
    Tensor backward(const Tensor& d_logits, bool want_dx = false);

    std::vector<nn::Param*> params();
    std::vector<std::pair<std::string, Tensor*>> state_tensors();
    const UNetWidths& widths() const { return widths_; }

private:
    UNetWidths widths_;
    std::vector<std::unique_ptr<nn::ConvBNRelu>> enc_;  // 8: two per block
    std::array<nn::MaxPool2x2, 4> pool_;
    std::array<nn::Upsample2x, 4> up_;
    std::vector<std::unique_ptr<nn::ConvBNRelu>> dec_;  // 8
    std::unique_ptr<nn::Conv2D> head_;

    std::array<Tensor, 4> skips_;
    std::array<int, 4> skip_ch_{};
};

}  // namespace taskaug::seg
