#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "steallab/autodiff.hpp"
#include "steallab/tensor.hpp"

namespace steallab {

enum class ArchKind { MLP, SmallConv };

// Desk-scale stand-in for ResNet18. MLP on flattened pixels or a small
// conv->relu->pool stack with global average pooling. Depth/width are
// configurable so architecture-mismatch ablations are just differing specs.
struct ArchSpec {
    ArchKind kind = ArchKind::MLP;
    int in_channels = 3;
    int in_h = 8;
    int in_w = 8;
    std::vector<int> hidden;  // MLP hidden widths, or conv channels per block
    int embed_dim = 32;
    bool with_projector = false;
    int proj_dim = 16;

    void validate() const {
        if (embed_dim <= 0) throw ConfigError("embed_dim must be positive");
        if (with_projector && proj_dim <= 0) throw ConfigError("proj_dim must be positive");
        if (in_channels <= 0 || in_h <= 0 || in_w <= 0) throw ConfigError("invalid input dims");
        for (int h : hidden)
            if (h <= 0) throw ConfigError("zero width layer");
    }
};

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

using ParamTree = std::vector<NamedTensor>;

struct EncoderModel {
    ArchSpec arch;
    ParamTree params;  // ordering is fixed by the arch spec, stable across runs
    int embed_dim = 0;
};

namespace detail {

inline void init_tensor(Tensor& t, int fan_in, Rng& rng) {
    // scaled-uniform fan-in: U(-b, b), b = sqrt(1/fan_in)
    float bound = 1.0f / std::sqrt((float)fan_in);
    for (auto& v : t.data) v = (float)rng.uniform(-bound, bound);
}

inline void push_linear(ParamTree& p, const std::string& prefix, int in, int out, Rng& rng) {
    NamedTensor w{prefix + ".weight", Tensor({out, in})};
    NamedTensor b{prefix + ".bias", Tensor({out})};
    init_tensor(w.tensor, in, rng);
    init_tensor(b.tensor, in, rng);
    p.push_back(std::move(w));
    p.push_back(std::move(b));
}

inline void push_conv(ParamTree& p, const std::string& prefix, int ci, int co, int k, Rng& rng) {
    NamedTensor w{prefix + ".weight", Tensor({co, ci, k, k})};
    NamedTensor b{prefix + ".bias", Tensor({co})};
    int fan_in = ci * k * k;
    init_tensor(w.tensor, fan_in, rng);
    init_tensor(b.tensor, fan_in, rng);
    p.push_back(std::move(w));
    p.push_back(std::move(b));
}

}  // namespace detail

inline EncoderModel init_model(const ArchSpec& arch, uint64_t seed) {
    arch.validate();
    Rng rng(Rng::mix(seed, 0x6d6f64656cULL));
    EncoderModel m;
    m.arch = arch;
    m.embed_dim = arch.embed_dim;
    if (arch.kind == ArchKind::MLP) {
        int in = arch.in_channels * arch.in_h * arch.in_w;
        int idx = 0;
        for (int h : arch.hidden) {
            detail::push_linear(m.params, "fc" + std::to_string(idx++), in, h, rng);
            in = h;
        }
        detail::push_linear(m.params, "head", in, arch.embed_dim, rng);
    } else {
        int ci = arch.in_channels;
        int idx = 0;
        for (int co : arch.hidden) {
            detail::push_conv(m.params, "conv" + std::to_string(idx++), ci, co, 3, rng);
            ci = co;
        }
        detail::push_linear(m.params, "head", ci, arch.embed_dim, rng);
    }
    if (arch.with_projector) {
        detail::push_linear(m.params, "proj0", arch.embed_dim, arch.embed_dim, rng);
        detail::push_linear(m.params, "proj1", arch.embed_dim, arch.proj_dim, rng);
    }
    return m;
}

// Wraps every parameter in a Var so one forward pass shares leaves.
inline std::vector<ad::Var> make_param_vars(const ParamTree& params, bool requires_grad = true) {
    std::vector<ad::Var> out;
    out.reserve(params.size());
    for (const auto& nt : params) out.push_back(ad::Var::leaf(nt.tensor, requires_grad));
    return out;
}

namespace detail {

// locate param var index by name
inline size_t pidx(const ParamTree& params, const std::string& name) {
    for (size_t i = 0; i < params.size(); ++i)
        if (params[i].name == name) return i;
    throw ConfigError("missing parameter " + name);
}

inline ad::Var linear(const ad::Var& x, const ad::Var& w, const ad::Var& b) {
    return ad::add_rows(ad::matmul_nt(x, w), b);  // w is [out,in]
}

}  // namespace detail

// Graph-building forward: batch [B,C,H,W] -> embeddings [B,D].
// pvars must come from make_param_vars(model.params).
inline ad::Var forward_graph(const EncoderModel& m, const std::vector<ad::Var>& pvars,
                             const ad::Var& batch, bool use_projector) {
    const Tensor& X = batch.value();
    if (X.rank() != 4 || X.dim(1) != m.arch.in_channels || X.dim(2) != m.arch.in_h ||
        X.dim(3) != m.arch.in_w)
        throw DimensionError("batch shape " + Tensor::shape_str(X.shape) + " does not match arch input");
    if (use_projector && !m.arch.with_projector)
        throw ConfigError("use_projector on a model without projector");
    size_t pi = 0;
    ad::Var h;
    if (m.arch.kind == ArchKind::MLP) {
        h = ad::flatten(batch);
        for (size_t l = 0; l < m.arch.hidden.size(); ++l) {
            h = ad::relu(detail::linear(h, pvars[pi], pvars[pi + 1]));
            pi += 2;
        }
        h = detail::linear(h, pvars[pi], pvars[pi + 1]);
        pi += 2;
    } else {
        h = batch;
        for (size_t l = 0; l < m.arch.hidden.size(); ++l) {
            h = ad::relu(ad::conv2d(h, pvars[pi], pvars[pi + 1], 1));
            pi += 2;
            if (h.value().dim(2) >= 2 && h.value().dim(3) >= 2) h = ad::avgpool2(h);
        }
        h = ad::global_avg_pool(h);
        h = detail::linear(h, pvars[pi], pvars[pi + 1]);
        pi += 2;
    }
    if (use_projector) {
        h = ad::relu(detail::linear(h, pvars[pi], pvars[pi + 1]));
        h = detail::linear(h, pvars[pi + 2], pvars[pi + 3]);
    }
    return h;
}

// Pure value-only forward (no gradient bookkeeping).
inline Tensor forward_embed(const EncoderModel& m, const Tensor& batch, bool use_projector = false) {
    auto pvars = make_param_vars(m.params, false);
    return forward_graph(m, pvars, ad::Var::leaf(batch, false), use_projector).value();
}

inline double cosine_sim(const Tensor& u, const Tensor& v) {
    if (u.numel() != v.numel()) throw DimensionError("cosine_sim: length mismatch");
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (int64_t i = 0; i < u.numel(); ++i) {
        uu += (double)u.data[i] * u.data[i];
        vv += (double)v.data[i] * v.data[i];
        uv += (double)u.data[i] * v.data[i];
    }
    if (uu <= 1e-24 || vv <= 1e-24) throw DegenerateInputError("zero-norm vector in cosine_sim");
    return uv / (std::sqrt(uu) * std::sqrt(vv));
}

// Central finite differences over a parameter tree; the test oracle for
// reverse-mode gradients.
template <typename LossFn>
ParamTree finite_diff_grad(LossFn&& loss_fn, ParamTree params, double epsilon) {
    ParamTree grads;
    for (auto& nt : params) grads.push_back({nt.name, Tensor(nt.tensor.shape)});
    for (size_t p = 0; p < params.size(); ++p) {
        for (int64_t i = 0; i < params[p].tensor.numel(); ++i) {
            float orig = params[p].tensor.data[i];
            params[p].tensor.data[i] = (float)(orig + epsilon);
            double up = loss_fn(params);
            params[p].tensor.data[i] = (float)(orig - epsilon);
            double down = loss_fn(params);
            params[p].tensor.data[i] = orig;
            grads[p].tensor.data[i] = (float)((up - down) / (2.0 * epsilon));
        }
    }
    return grads;
}

inline uint64_t hash_params(const ParamTree& params) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& nt : params) {
        h = fnv1a(nt.name.data(), nt.name.size(), h);
        h = hash_tensor(nt.tensor, h);
    }
    return h;
}

}  // namespace steallab
