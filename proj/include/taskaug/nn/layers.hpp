#pragma once

#include <string>
#include <vector>

#include "taskaug/core/rng.hpp"
#include "taskaug/core/tensor.hpp"
#include "taskaug/nn/param.hpp"

namespace taskaug::nn {

// Layers operate on channels-last batches (N,H,W,C); Dense on (N,F).
// forward() caches what backward() needs; a backward must follow its own
// forward before the layer is run again.

class Conv2D {
public:
    Conv2D(std::string name, int in_ch, int out_ch, int ksize, int stride = 1);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy, bool want_dx = true);

    void collect(std::vector<Param*>& out);
    void init_he(Rng& rng);
    void set_bias(int channel, float value);

    int out_ch() const { return out_ch_; }

private:
    int in_ch_, out_ch_, k_, stride_, pad_;
    Param w_, b_;
    Tensor x_;
};

class BatchNorm {
public:
    // Normalizes over all leading dims, per trailing channel.
    BatchNorm(std::string name, int channels, float momentum = 0.9f, float eps = 1e-5f);

    Tensor forward(const Tensor& x, Mode mode, bool update_running = true);
    Tensor backward(const Tensor& dy);

    void collect(std::vector<Param*>& out);
    // Running statistics participate in checkpoints but not in optimization.
    Tensor& running_mean() { return running_mean_; }
    Tensor& running_var() { return running_var_; }

private:
    int channels_;
    float momentum_, eps_;
    Param gamma_, beta_;
    Tensor running_mean_, running_var_;
    Tensor x_hat_;
    std::vector<float> inv_std_;
    Mode mode_ = Mode::Train;
};

class Dense {
public:
    Dense(std::string name, int in_features, int out_features);

    Tensor forward(const Tensor& x);  // (N,Fin) -> (N,Fout)
    Tensor backward(const Tensor& dy, bool want_dx = true);

    void collect(std::vector<Param*>& out);
    void init_he(Rng& rng);

private:
    int in_f_, out_f_;
    Param w_, b_;
    Tensor x_;
};

class ReLU {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;

private:
    std::vector<char> mask_;
};

class LeakyReLU {
public:
    explicit LeakyReLU(float slope = 0.2f) : slope_(slope) {}
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;

private:
    float slope_;
    std::vector<char> mask_;
};

class Tanh {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;

private:
    Tensor y_;
};

class MaxPool2x2 {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;

private:
    std::vector<int> shape_in_;
    std::vector<std::int32_t> argmax_;
};

// Bilinear x2 upsampling with the half-pixel convention; edges clamp.
class Upsample2x {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;

private:
    std::vector<int> shape_in_;
};

Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& dy, int ca, Tensor& da, Tensor& db);

}  // namespace taskaug::nn
