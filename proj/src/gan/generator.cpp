#include "taskaug/gan/generator.hpp"

#include <algorithm>

#include "taskaug/core/errors.hpp"

namespace taskaug::gan {

const char* kind_name(GeneratorKind k) {
    return k == GeneratorKind::Deformation ? "deformation" : "intensity";
}

GeneratorKind kind_from_name(const std::string& name) {
    if (name == "deformation" || name == "gd") return GeneratorKind::Deformation;
    if (name == "intensity" || name == "gi") return GeneratorKind::Intensity;
    throw std::invalid_argument("unknown generator kind: " + name);
}

GeneratorNetwork::GeneratorNetwork(GeneratorKind kind, int grid, GenWidths widths, int z_dim)
    : kind_(kind), grid_(grid), widths_(widths), z_dim_(z_dim) {
    if (grid % 32 != 0) throw ShapeMismatch("generator grid must be divisible by 32");
    base_ = grid / 32;

    x_a_ = std::make_unique<nn::ConvBNRelu>("gx.a", 1, widths_.x_path[0]);
    x_b_ = std::make_unique<nn::ConvBNRelu>("gx.b", widths_.x_path[0], widths_.x_path[1]);
    x_out_ch_ = widths_.x_path[1];

    z_fc_ = std::make_unique<nn::Dense>("gz.fc", z_dim_, base_ * base_ * widths_.z_path[0]);
    z_bn_ = std::make_unique<nn::BatchNorm>("gz.bn", widths_.z_path[0]);
    int ch = widths_.z_path[0];
    for (int i = 0; i < 5; ++i) {
        z_conv_.push_back(std::make_unique<nn::ConvBNRelu>("gz.c" + std::to_string(i), ch,
                                                           widths_.z_path[static_cast<size_t>(i)]));
        ch = widths_.z_path[static_cast<size_t>(i)];
    }

    int cch = x_out_ch_ + ch;
    for (int i = 0; i < 3; ++i) {
        common_.push_back(std::make_unique<nn::ConvBNRelu>(
            "gc.c" + std::to_string(i), cch, widths_.common[static_cast<size_t>(i)]));
        cch = widths_.common[static_cast<size_t>(i)];
    }
    head_ = std::make_unique<nn::Conv2D>("gc.head", cch, out_channels(), 1);
}

void GeneratorNetwork::init(std::uint64_t seed) {
    Rng rng(seed);
    x_a_->init(rng);
    x_b_->init(rng);
    z_fc_->init_he(rng);
    for (auto& b : z_conv_) b->init(rng);
    for (auto& b : common_) b->init(rng);
    head_->init_he(rng);
}

Tensor GeneratorNetwork::forward(const Tensor& images, const Tensor& z, nn::Mode mode,
                                 bool update_running) {
    if (images.rank() != 4 || images.dim(3) != 1)
        throw ShapeMismatch("generator expects (N,H,W,1) images");
    if (images.dim(1) != grid_ || images.dim(2) != grid_)
        throw ShapeMismatch("generator grid mismatch");
    if (z.rank() != 2 || z.dim(0) != images.dim(0) || z.dim(1) != z_dim_)
        throw ShapeMismatch("generator z batch mismatch");
    const int n = images.dim(0);

    Tensor xf = x_a_->forward(images, mode, update_running);
    xf = x_b_->forward(xf, mode, update_running);

    Tensor zf = z_fc_->forward(z).reshaped({n, base_, base_, widths_.z_path[0]});
    zf = z_act_.forward(z_bn_->forward(zf, mode, update_running));
    for (int i = 0; i < 5; ++i) {
        zf = z_up_[static_cast<size_t>(i)].forward(zf);
        zf = z_conv_[static_cast<size_t>(i)]->forward(zf, mode, update_running);
    }

    Tensor c = nn::concat_channels(zf, xf);
    for (auto& b : common_) c = b->forward(c, mode, update_running);
    c = head_->forward(c);
    if (kind_ == GeneratorKind::Intensity) {
        c = tanh_.forward(c);
        // keep the mask strictly inside (-1,1) even where float tanh saturates
        constexpr float cap = 1.0f - 1e-6f;
        for (std::int64_t i = 0; i < c.size(); ++i) c[i] = std::clamp(c[i], -cap, cap);
    }
    return c;
}

void GeneratorNetwork::backward(const Tensor& d_out) {
    Tensor d = d_out;
    if (kind_ == GeneratorKind::Intensity) d = tanh_.backward(d);
    d = head_->backward(d);
    for (auto it = common_.rbegin(); it != common_.rend(); ++it) d = (*it)->backward(d);

    Tensor dz, dx;
    nn::split_channels(d, d.dim(3) - x_out_ch_, dz, dx);

    x_a_->backward(x_b_->backward(dx), false);

    for (int i = 4; i >= 0; --i) {
        dz = z_conv_[static_cast<size_t>(i)]->backward(dz);
        dz = z_up_[static_cast<size_t>(i)].backward(dz);
    }
    dz = z_bn_->backward(z_act_.backward(dz));
    z_fc_->backward(dz.reshaped({dz.dim(0), base_ * base_ * widths_.z_path[0]}), false);
}

std::vector<nn::Param*> GeneratorNetwork::params() {
    std::vector<nn::Param*> out;
    x_a_->collect(out);
    x_b_->collect(out);
    z_fc_->collect(out);
    z_bn_->collect(out);
    for (auto& b : z_conv_) b->collect(out);
    for (auto& b : common_) b->collect(out);
    head_->collect(out);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> GeneratorNetwork::state_tensors() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (nn::Param* p : params()) out.emplace_back(p->name, &p->value);
    x_a_->state(out);
    x_b_->state(out);
    out.emplace_back("gz.bn.rmean", &z_bn_->running_mean());
    out.emplace_back("gz.bn.rvar", &z_bn_->running_var());
    for (auto& b : z_conv_) b->state(out);
    for (auto& b : common_) b->state(out);
    return out;
}

Tensor sample_z(int n, int z_dim, Rng& rng) {
    Tensor z({n, z_dim});
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    for (std::int64_t i = 0; i < z.size(); ++i) z[i] = gauss(rng);
    return z;
}

std::pair<Tensor, Tensor> synthesize_pair(GeneratorNetwork& net, const Tensor& image_hw,
                                          const Tensor& labels_hw4, const Tensor& z_row,
                                          nn::Mode mode) {
    const int h = image_hw.dim(0), w = image_hw.dim(1);
    Tensor batch({1, h, w, 1});
    std::copy(image_hw.data(), image_hw.data() + image_hw.size(), batch.data());
    Tensor z = z_row.reshaped({1, static_cast<int>(z_row.size())});
    Tensor out = net.forward(batch, z, mode, false);

    if (net.kind() == GeneratorKind::Deformation) {
        warp::DeformationField field{out.reshaped({h, w, 2})};
        return {warp::warp_bilinear(image_hw, field), warp::warp_labels(labels_hw4, field)};
    }
    warp::IntensityMask mask{out.reshaped({h, w})};
    return {warp::apply_intensity(image_hw, mask), labels_hw4};
}

}  // namespace taskaug::gan
