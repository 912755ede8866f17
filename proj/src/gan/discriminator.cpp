#include "taskaug/gan/discriminator.hpp"

#include "taskaug/core/errors.hpp"

namespace taskaug::gan {

DiscriminatorNetwork::DiscriminatorNetwork(int grid, DiscWidths widths)
    : grid_(grid), widths_(widths) {
    if (grid % 32 != 0) throw ShapeMismatch("discriminator grid must be divisible by 32");
    int ch = 1;
    for (int i = 0; i < 5; ++i) {
        conv_.push_back(std::make_unique<nn::ConvBNLeaky>(
            "d.c" + std::to_string(i), ch, widths_.conv[static_cast<size_t>(i)], 5, 2, 0.2f));
        ch = widths_.conv[static_cast<size_t>(i)];
    }
    const int s = grid / 32;
    flat_ = s * s * ch;
    fc1_ = std::make_unique<nn::Dense>("d.fc1", flat_, widths_.fc[0]);
    fc2_ = std::make_unique<nn::Dense>("d.fc2", widths_.fc[0], widths_.fc[1]);
    fc3_ = std::make_unique<nn::Dense>("d.fc3", widths_.fc[1], 2);
}

void DiscriminatorNetwork::init(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& b : conv_) b->init(rng);
    fc1_->init_he(rng);
    fc2_->init_he(rng);
    fc3_->init_he(rng);
}

Tensor DiscriminatorNetwork::forward(const Tensor& images, nn::Mode mode, bool update_running) {
    if (images.rank() != 4 || images.dim(3) != 1)
        throw ShapeMismatch("discriminator expects (N,H,W,1)");
    if (images.dim(1) != grid_ || images.dim(2) != grid_)
        throw ShapeMismatch("discriminator grid mismatch");
    Tensor x = images;
    for (auto& b : conv_) x = b->forward(x, mode, update_running);
    conv_out_shape_ = x.shape();
    x = x.reshaped({x.dim(0), flat_});
    x = act1_.forward(fc1_->forward(x));
    x = act2_.forward(fc2_->forward(x));
    return fc3_->forward(x);
}

Tensor DiscriminatorNetwork::backward(const Tensor& d_logits, bool want_dx) {
    Tensor d = fc3_->backward(d_logits);
    d = fc2_->backward(act2_.backward(d));
    d = fc1_->backward(act1_.backward(d));
    d = d.reshaped(conv_out_shape_);
    for (size_t i = conv_.size(); i-- > 0;) {
        const bool need_dx = want_dx || i > 0;
        d = conv_[i]->backward(d, need_dx);
    }
    return d;
}

std::vector<nn::Param*> DiscriminatorNetwork::params() {
    std::vector<nn::Param*> out;
    for (auto& b : conv_) b->collect(out);
    fc1_->collect(out);
    fc2_->collect(out);
    fc3_->collect(out);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> DiscriminatorNetwork::state_tensors() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (nn::Param* p : params()) out.emplace_back(p->name, &p->value);
    for (auto& b : conv_) b->state(out);
    return out;
}

}  // namespace taskaug::gan
