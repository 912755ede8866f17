#pragma once

#include <string>
#include <utility>
#include <vector>

#include "taskaug/nn/layers.hpp"

namespace taskaug::nn {

// conv -> batch-norm -> ReLU
struct ConvBNRelu {
    Conv2D conv;
    BatchNorm bn;
    ReLU act;

    ConvBNRelu(const std::string& name, int in_ch, int out_ch, int k = 3, int stride = 1)
        : conv(name + ".conv", in_ch, out_ch, k, stride), bn(name + ".bn", out_ch) {
        bn_name_ = name + ".bn";
    }

    Tensor forward(const Tensor& x, Mode mode, bool update_running = true) {
        return act.forward(bn.forward(conv.forward(x), mode, update_running));
    }
    Tensor backward(const Tensor& dy, bool want_dx = true) {
        return conv.backward(bn.backward(act.backward(dy)), want_dx);
    }
    void collect(std::vector<Param*>& out) {
        conv.collect(out);
        bn.collect(out);
    }
    void state(std::vector<std::pair<std::string, Tensor*>>& out) {
        out.emplace_back(bn_name_ + ".rmean", &bn.running_mean());
        out.emplace_back(bn_name_ + ".rvar", &bn.running_var());
    }
    void init(Rng& rng) { conv.init_he(rng); }

private:
    std::string bn_name_;
};

// conv -> batch-norm -> leaky ReLU (discriminator flavour)
struct ConvBNLeaky {
    Conv2D conv;
    BatchNorm bn;
    LeakyReLU act;

    ConvBNLeaky(const std::string& name, int in_ch, int out_ch, int k, int stride, float slope)
        : conv(name + ".conv", in_ch, out_ch, k, stride), bn(name + ".bn", out_ch), act(slope) {
        bn_name_ = name + ".bn";
    }

    Tensor forward(const Tensor& x, Mode mode, bool update_running = true) {
        return act.forward(bn.forward(conv.forward(x), mode, update_running));
    }
    Tensor backward(const Tensor& dy, bool want_dx = true) {
        return conv.backward(bn.backward(act.backward(dy)), want_dx);
    }
    void collect(std::vector<Param*>& out) {
        conv.collect(out);
        bn.collect(out);
    }
    void state(std::vector<std::pair<std::string, Tensor*>>& out) {
        out.emplace_back(bn_name_ + ".rmean", &bn.running_mean());
        out.emplace_back(bn_name_ + ".rvar", &bn.running_var());
    }
    void init(Rng& rng) { conv.init_he(rng); }

private:
    std::string bn_name_;
};

}  // namespace taskaug::nn
