#pragma once

#include <adnet/error.hpp>
#include <adnet/tensor.hpp>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace adnet {

struct AdamOptions {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Moment buffers for a fixed, ordered list of parameters.
struct AdamState {
    AdamOptions options;
    std::vector<Tensor2> first_moment;
    std::vector<Tensor2> second_moment;
    std::uint64_t step_count = 0;

    AdamState() = default;

    AdamState(AdamOptions opts, std::span<ParamTensor* const> params) : options(opts) {
        first_moment.reserve(params.size());
        second_moment.reserve(params.size());
        for (const ParamTensor* p : params) {
            first_moment.emplace_back(p->value.channels(), p->value.length());
            second_moment.emplace_back(p->value.channels(), p->value.length());
        }
    }
};

/// One bias-corrected Adam update. Gradients are read, not cleared.
inline void adam_step(std::span<ParamTensor* const> params, AdamState& state) {
    if (params.size() != state.first_moment.size() || params.size() != state.second_moment.size()) {
        throw ConfigError("adam_step: " + std::to_string(params.size()) + " parameters but state tracks " +
                          std::to_string(state.first_moment.size()));
    }
    const AdamOptions& o = state.options;
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double correction1 = 1.0 - std::pow(o.beta1, t);
    const double correction2 = 1.0 - std::pow(o.beta2, t);

    for (std::size_t k = 0; k < params.size(); ++k) {
        ParamTensor& p = *params[k];
        Tensor2& m = state.first_moment[k];
        Tensor2& v = state.second_moment[k];
        if (!p.value.same_shape(p.grad) || !p.value.same_shape(m) || !p.value.same_shape(v)) {
            throw ConfigError("adam_step: shape mismatch for parameter " + std::to_string(k));
        }
        auto theta = p.value.values();
        auto g = p.grad.values();
        auto mv = m.values();
        auto vv = v.values();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            mv[i] = o.beta1 * mv[i] + (1.0 - o.beta1) * g[i];
            vv[i] = o.beta2 * vv[i] + (1.0 - o.beta2) * g[i] * g[i];
            const double m_hat = mv[i] / correction1;
            const double v_hat = vv[i] / correction2;
            theta[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.epsilon);
        }
    }
}

} // namespace adnet
