#pragma once

#include <array>
#include <memory>

#include "taskaug/nn/blocks.hpp"
#include "taskaug/warp/warp.hpp"

namespace taskaug::gan {

enum class GeneratorKind { Deformation, Intensity };

const char* kind_name(GeneratorKind k);
GeneratorKind kind_from_name(const std::string& name);

struct GenWidths {
    std::array<int, 2> x_path{16, 16};
    std::array<int, 5> z_path{64, 64, 32, 32, 16};
    std::array<int, 3> common{32, 32, 16};  // final output conv appended per kind
};

// Conditional generator. The image runs through a 2-conv sub-network; the
// noise vector through a dense layer reshaped to (H/32,W/32) followed by five
// conv layers each preceded by x2 bilinear upsampling. The concatenated
// features pass through a 4-conv common head whose final 1x1 layer emits
// 2 maps (deformation field, unbounded) or 1 map (intensity mask, tanh).
class GeneratorNetwork {
public:
    GeneratorNetwork(GeneratorKind kind, int grid, GenWidths widths = {}, int z_dim = 100);

    void init(std::uint64_t seed);

    // images (N,H,W,1), z (N,z_dim) -> (N,H,W,2) or (N,H,W,1)
    Tensor forward(const Tensor& images, const Tensor& z, nn::Mode mode,
                   bool update_running = true);
    void backward(const Tensor& d_out);

    std::vector<nn::Param*> params();
    std::vector<std::pair<std::string, Tensor*>> state_tensors();

    GeneratorKind kind() const { return kind_; }
    int z_dim() const { return z_dim_; }
    int grid() const { return grid_; }
    const GenWidths& widths() const { return widths_; }
    int out_channels() const { return kind_ == GeneratorKind::Deformation ? 2 : 1; }

private:
    GeneratorKind kind_;
    int grid_;
    GenWidths widths_;
    int z_dim_;
    int base_;  // grid / 32

    std::unique_ptr<nn::ConvBNRelu> x_a_, x_b_;
    std::unique_ptr<nn::Dense> z_fc_;
    std::unique_ptr<nn::BatchNorm> z_bn_;
    nn::ReLU z_act_;
    std::array<nn::Upsample2x, 5> z_up_;
    std::vector<std::unique_ptr<nn::ConvBNRelu>> z_conv_;
    std::vector<std::unique_ptr<nn::ConvBNRelu>> common_;
    std::unique_ptr<nn::Conv2D> head_;
    nn::Tanh tanh_;

    int x_out_ch_ = 0;
};

// Draws z rows from the unit Gaussian.
Tensor sample_z(int n, int z_dim, Rng& rng);

// Applies a generator output to one (image, one-hot labels) slice pair:
// deformation -> warped image + warped labels; intensity -> image + mask,
// labels untouched.
std::pair<Tensor, Tensor> synthesize_pair(GeneratorNetwork& net, const Tensor& image_hw,
                                          const Tensor& labels_hw4, const Tensor& z_row,
                                          nn::Mode mode = nn::Mode::Eval);

}  // namespace taskaug::gan
