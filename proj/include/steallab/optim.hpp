#pragma once

#include <cmath>

#include "steallab/nn.hpp"

namespace steallab {

struct AdamState {
    int64_t step = 0;
    ParamTree m;
    ParamTree v;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(const ParamTree& params, double lr) {
        AdamState s;
        s.lr = lr;
        for (const auto& nt : params) {
            s.m.push_back({nt.name, Tensor(nt.tensor.shape)});
            s.v.push_back({nt.name, Tensor(nt.tensor.shape)});
        }
        return s;
    }
};

// Standard bias-corrected Adam update, in place.
inline void adam_step(ParamTree& params, const ParamTree& grads, AdamState& state) {
    if (params.size() != grads.size()) throw DimensionError("adam_step: tree size mismatch");
    state.step += 1;
    double bc1 = 1.0 - std::pow(state.beta1, (double)state.step);
    double bc2 = 1.0 - std::pow(state.beta2, (double)state.step);
    for (size_t p = 0; p < params.size(); ++p) {
        if (!params[p].tensor.same_shape(grads[p].tensor))
            throw DimensionError("adam_step: grad shape mismatch for " + params[p].name);
        auto& w = params[p].tensor.data;
        const auto& g = grads[p].tensor.data;
        auto& m = state.m[p].tensor.data;
        auto& v = state.v[p].tensor.data;
        for (size_t i = 0; i < w.size(); ++i) {
            if (!std::isfinite(g[i]))
                throw NumericError("non-finite gradient in " + params[p].name);
            m[i] = (float)(state.beta1 * m[i] + (1.0 - state.beta1) * g[i]);
            v[i] = (float)(state.beta2 * v[i] + (1.0 - state.beta2) * (double)g[i] * g[i]);
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            w[i] = (float)(w[i] - state.lr * mhat / (std::sqrt(vhat) + state.eps));
        }
    }
}

// Gradient extraction after Var::backward(): pairs pvars with their names.
inline ParamTree collect_grads(const ParamTree& params, const std::vector<ad::Var>& pvars) {
    ParamTree grads;
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor g = pvars[i].grad().data.empty() ? Tensor(params[i].tensor.shape) : pvars[i].grad();
        grads.push_back({params[i].name, std::move(g)});
    }
    return grads;
}

}  // namespace steallab
