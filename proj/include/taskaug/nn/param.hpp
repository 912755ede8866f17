#pragma once

#include <string>
#include <utility>
#include <vector>

#include "taskaug/core/tensor.hpp"

namespace taskaug::nn {

// One learnable tensor with its gradient and Adam moment buffers.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;

    Param(std::string n, std::vector<int> shape)
        : name(std::move(n)), value(shape), grad(shape), m(shape), v(std::move(shape)) {}

    void zero_grad() { grad.zero(); }
};

enum class Mode { Train, Eval };

}  // namespace taskaug::nn
