#pragma once

#include <cmath>
#include <vector>

#include "taskaug/nn/param.hpp"

namespace taskaug::nn {

// Standard Adam with bias correction. One instance per optimized network.
class Adam {
public:
    Adam(float lr, float beta1 = 0.9f, float beta2 = 0.999f, float eps = 1e-8f)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Param*>& params) {
        ++t_;
        const double bc1 = 1.0 - std::pow(static_cast<double>(beta1_), t_);
        const double bc2 = 1.0 - std::pow(static_cast<double>(beta2_), t_);
        for (Param* p : params) {
            for (std::int64_t i = 0; i < p->value.size(); ++i) {
                const float g = p->grad[i];
                p->m[i] = beta1_ * p->m[i] + (1.0f - beta1_) * g;
                p->v[i] = beta2_ * p->v[i] + (1.0f - beta2_) * g * g;
                const double mhat = p->m[i] / bc1;
                const double vhat = p->v[i] / bc2;
                p->value[i] -= static_cast<float>(lr_ * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

    std::int64_t steps() const { return t_; }

private:
    float lr_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
};

inline void zero_grads(const std::vector<Param*>& params) {
    for (Param* p : params) p->zero_grad();
}

}  // namespace taskaug::nn
