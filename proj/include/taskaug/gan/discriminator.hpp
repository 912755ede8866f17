#pragma once

#include <array>
#include <memory>

#include "taskaug/nn/blocks.hpp"

namespace taskaug::gan {

struct DiscWidths {
    std::array<int, 5> conv{16, 32, 64, 128, 256};
    std::array<int, 2> fc{128, 64};
};

// 5 conv layers (5x5, stride 2, batch-norm, leaky-ReLU slope 0.2) followed by
// 3 fully-connected layers; the final layer emits 2 logits (fake, real).
class DiscriminatorNetwork {
public:
    explicit DiscriminatorNetwork(int grid, DiscWidths widths = {});

    void init(std::uint64_t seed);

    // (N,H,W,1) -> (N,2)
    Tensor forward(const Tensor& images, nn::Mode mode, bool update_running = true);
    Tensor backward(const Tensor& d_logits, bool want_dx = false);

    std::vector<nn::Param*> params();
    std::vector<std::pair<std::string, Tensor*>> state_tensors();
    int grid() const { return grid_; }
    const DiscWidths& widths() const { return widths_; }

private:
    int grid_;
    DiscWidths widths_;
    int flat_ = 0;
    std::vector<std::unique_ptr<nn::ConvBNLeaky>> conv_;
    std::unique_ptr<nn::Dense> fc1_, fc2_, fc3_;
    nn::LeakyReLU act1_{0.2f}, act2_{0.2f};
    std::vector<int> conv_out_shape_;
};

}  // namespace taskaug::gan
