#pragma once

#include <deque>
#include <numeric>
#include <string>
#include <vector>

#include "steallab/augment.hpp"
#include "steallab/data.hpp"
#include "steallab/losses.hpp"
#include "steallab/nn.hpp"
#include "steallab/optim.hpp"

namespace steallab {

enum class Method { SimCLR, MoCo, BYOL, SimSiam, Supervised };

inline Method parse_method(const std::string& s) {
    if (s == "simclr") return Method::SimCLR;
    if (s == "moco") return Method::MoCo;
    if (s == "byol") return Method::BYOL;
    if (s == "simsiam") return Method::SimSiam;
    if (s == "supervised") return Method::Supervised;
    throw ConfigError("unknown pretraining method '" + s + "'");
}

inline std::string method_name(Method m) {
    switch (m) {
        case Method::SimCLR: return "simclr";
        case Method::MoCo: return "moco";
        case Method::BYOL: return "byol";
        case Method::SimSiam: return "simsiam";
        case Method::Supervised: return "supervised";
    }
    return "?";
}

// MoCo dictionary: FIFO queue of L2-normalized keys plus the momentum-encoder
// parameter copy.
struct MoCoState {
    ParamTree momentum_params;
    std::deque<std::vector<float>> queue;
    double momentum = 0.99;
    int64_t capacity = 1024;
    int64_t dim = 0;

    Tensor queue_tensor() const {
        if (queue.empty()) return Tensor{};
        Tensor q({(int64_t)queue.size(), dim});
        for (size_t i = 0; i < queue.size(); ++i)
            std::copy(queue[i].begin(), queue[i].end(), q.data.begin() + (int64_t)i * dim);
        return q;
    }
};

// EMA momentum-parameter update plus FIFO enqueue of the new keys
// (normalized) and dequeue of the oldest.
inline void moco_update(MoCoState& state, const ParamTree& online_params, const Tensor& new_keys) {
    if (new_keys.rank() != 2) throw DimensionError("new_keys must be [N,D]");
    int64_t N = new_keys.dim(0), D = new_keys.dim(1);
    if (N > state.capacity) throw ConfigError("batch larger than queue capacity");
    if (state.dim == 0) state.dim = D;
    if (state.dim != D) throw DimensionError("key width changed");
    if (state.momentum_params.size() != online_params.size())
        throw DimensionError("momentum/online tree mismatch");
    for (size_t p = 0; p < online_params.size(); ++p) {
        auto& mp = state.momentum_params[p].tensor.data;
        const auto& op = online_params[p].tensor.data;
        for (size_t i = 0; i < mp.size(); ++i)
            mp[i] = (float)(state.momentum * mp[i] + (1.0 - state.momentum) * op[i]);
    }
    for (int64_t i = 0; i < N; ++i) {
        double nrm = 0.0;
        for (int64_t j = 0; j < D; ++j) nrm += (double)new_keys.data[i * D + j] * new_keys.data[i * D + j];
        nrm = std::sqrt(nrm);
        if (nrm <= 1e-12) throw DegenerateInputError("zero-norm key");
        std::vector<float> k((size_t)D);
        for (int64_t j = 0; j < D; ++j) k[(size_t)j] = (float)(new_keys.data[i * D + j] / nrm);
        state.queue.push_back(std::move(k));
    }
    while ((int64_t)state.queue.size() > state.capacity) state.queue.pop_front();
}

// Spec-shaped single-sample MoCo loss value.
inline double moco_loss(const Tensor& q, const Tensor& k_pos, const MoCoState& state, double tau) {
    Tensor qr({1, q.numel()}, q.data), kr({1, k_pos.numel()}, k_pos.data);
    return moco_loss_graph(ad::Var::leaf(qr, false), ad::Var::leaf(kr, false), state.queue_tensor(), tau)
        .item();
}

// BYOL EMA target parameters (encoder + projector copy; never sees gradients).
struct ByolState {
    ParamTree target_params;
    double decay = 0.99;
};

inline void byol_update(ByolState& state, const ParamTree& online_params) {
    if (state.target_params.size() != online_params.size())
        throw DimensionError("target/online tree mismatch");
    for (size_t p = 0; p < online_params.size(); ++p) {
        auto& tp = state.target_params[p].tensor.data;
        const auto& op = online_params[p].tensor.data;
        for (size_t i = 0; i < tp.size(); ++i)
            tp[i] = (float)(state.decay * tp[i] + (1.0 - state.decay) * op[i]);
    }
}

struct PretrainHyper {
    int epochs = 50;
    int batch_size = 64;
    double lr = 1e-3;
    double tau_simclr = 0.5;
    double tau_moco = 0.07;
    int64_t moco_queue = 1024;
    double moco_momentum = 0.99;
    double byol_decay = 0.99;
    AugmentPolicy augment;
};

struct PretrainResult {
    EncoderModel model;  // frozen backbone, projector discarded
    std::vector<double> epoch_losses;
};

namespace detail {

// 2-layer MLP head used as BYOL/SimSiam predictor.
inline ParamTree make_predictor(int dim, uint64_t seed) {
    Rng rng(Rng::mix(seed, 0x70726564ULL));
    ParamTree p;
    push_linear(p, "pred0", dim, dim, rng);
    push_linear(p, "pred1", dim, dim, rng);
    return p;
}

inline ad::Var predictor_forward(const std::vector<ad::Var>& pv, const ad::Var& x) {
    auto h = ad::relu(linear(x, pv[0], pv[1]));
    return linear(h, pv[2], pv[3]);
}

inline std::vector<std::vector<int64_t>> epoch_batches(int64_t M, int batch_size, uint64_t seed,
                                                       uint64_t epoch) {
    std::vector<int64_t> order((size_t)M);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng::derive(seed, epoch, 0, 0xbacc);
    for (int64_t i = M - 1; i > 0; --i) std::swap(order[(size_t)i], order[(size_t)rng.uniform_int(i + 1)]);
    std::vector<std::vector<int64_t>> batches;
    for (int64_t s = 0; s < M; s += batch_size)
        batches.emplace_back(order.begin() + s, order.begin() + std::min<int64_t>(M, s + batch_size));
    return batches;
}

inline EncoderModel strip_projector(EncoderModel m) {
    if (!m.arch.with_projector) return m;
    ParamTree kept;
    for (auto& nt : m.params)
        if (nt.name.rfind("proj", 0) != 0) kept.push_back(std::move(nt));
    m.params = std::move(kept);
    m.arch.with_projector = false;
    return m;
}

// Interleave two [N,D] batches into [2N,D] with rows (2k, 2k+1) paired.
inline ad::Var interleave_rows(const ad::Var& a, const ad::Var& b) {
    int64_t N = a.value().dim(0), D = a.value().dim(1);
    // build via masks: out = P_a @ a + P_b @ b with constant placement matrices
    Tensor Pa({2 * N, N}), Pb({2 * N, N});
    for (int64_t k = 0; k < N; ++k) {
        Pa.data[(2 * k) * N + k] = 1.0f;
        Pb.data[(2 * k + 1) * N + k] = 1.0f;
    }
    (void)D;
    return ad::add(ad::matmul(ad::Var::leaf(Pa, false), a), ad::matmul(ad::Var::leaf(Pb, false), b));
}

}  // namespace detail

inline PretrainResult pretrain_encoder(Method method, const Dataset& ds, const ArchSpec& arch_in,
                                       const PretrainHyper& hyper, uint64_t seed) {
    ArchSpec arch = arch_in;
    // SimCLR/BYOL train through a projection head, discarded afterwards.
    if (method == Method::SimCLR || method == Method::BYOL) arch.with_projector = true;
    if (method == Method::MoCo || method == Method::SimSiam || method == Method::Supervised)
        arch.with_projector = false;
    if (method == Method::Supervised && !ds.labels)
        throw ConfigError("supervised pretraining requires labels");

    EncoderModel model = init_model(arch, seed);
    AdamState opt = AdamState::init(model.params, hyper.lr);

    // Auxiliary heads living outside the returned encoder.
    ParamTree aux;
    AdamState aux_opt;
    MoCoState moco;
    ByolState byol;
    if (method == Method::BYOL || method == Method::SimSiam) {
        int dim = method == Method::BYOL ? arch.proj_dim : arch.embed_dim;
        aux = detail::make_predictor(dim, seed);
        aux_opt = AdamState::init(aux, hyper.lr);
    }
    if (method == Method::Supervised) {
        Rng rng(Rng::mix(seed, 0x636c7366ULL));
        detail::push_linear(aux, "cls", arch.embed_dim, ds.classes, rng);
        aux_opt = AdamState::init(aux, hyper.lr);
    }
    if (method == Method::MoCo) {
        moco.momentum_params = model.params;
        moco.momentum = hyper.moco_momentum;
        moco.capacity = hyper.moco_queue;
    }
    if (method == Method::BYOL) {
        byol.target_params = model.params;
        byol.decay = hyper.byol_decay;
    }

    AugmentPolicy policy = hyper.augment;
    policy.rng_seed = Rng::mix(policy.rng_seed, seed);

    PretrainResult result;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        double epoch_loss = 0.0;
        int64_t batches = 0;
        for (const auto& idx : detail::epoch_batches(ds.size(), hyper.batch_size, seed, (uint64_t)epoch)) {
            Tensor batch = ds.gather(idx);
            auto pvars = make_param_vars(model.params);
            ad::Var loss;
            if (method == Method::Supervised) {
                auto av = make_param_vars(aux);
                auto h = forward_graph(model, pvars, ad::Var::leaf(batch, false), false);
                auto logits = detail::linear(h, av[0], av[1]);
                std::vector<int> labels;
                for (int64_t i : idx) labels.push_back((*ds.labels)[(size_t)i]);
                loss = ad::cross_entropy_logits(logits, labels);
                loss.backward();
                adam_step(aux, collect_grads(aux, av), aux_opt);
            } else {
                auto [vt, vs] = make_views(batch, policy, (uint64_t)epoch, idx);
                auto xt = ad::Var::leaf(vt, false);
                auto xs = ad::Var::leaf(vs, false);
                if (method == Method::SimCLR) {
                    auto z1 = forward_graph(model, pvars, xt, true);
                    auto z2 = forward_graph(model, pvars, xs, true);
                    loss = simclr_batch_loss_graph(detail::interleave_rows(z1, z2), hyper.tau_simclr);
                    loss.backward();
                } else if (method == Method::MoCo) {
                    auto q = forward_graph(model, pvars, xt, false);
                    EncoderModel mom{model.arch, moco.momentum_params, model.embed_dim};
                    Tensor keys = forward_embed(mom, vs, false);
                    loss = moco_loss_graph(q, ad::Var::leaf(keys, false), moco.queue_tensor(),
                                           hyper.tau_moco);
                    loss.backward();
                    moco_update(moco, model.params, keys);
                } else if (method == Method::BYOL) {
                    auto av = make_param_vars(aux);
                    auto p1 = detail::predictor_forward(av, forward_graph(model, pvars, xt, true));
                    auto p2 = detail::predictor_forward(av, forward_graph(model, pvars, xs, true));
                    EncoderModel tgt{model.arch, byol.target_params, model.embed_dim};
                    auto t1 = ad::Var::leaf(forward_embed(tgt, vt, true), false);
                    auto t2 = ad::Var::leaf(forward_embed(tgt, vs, true), false);
                    loss = ad::scale(ad::add(byol_loss_graph(p1, t2), byol_loss_graph(p2, t1)), 0.5f);
                    loss.backward();
                    adam_step(aux, collect_grads(aux, av), aux_opt);
                } else {  // SimSiam
                    auto av = make_param_vars(aux);
                    auto h1 = forward_graph(model, pvars, xt, false);
                    auto h2 = forward_graph(model, pvars, xs, false);
                    auto g1 = detail::predictor_forward(av, h1);
                    auto g2 = detail::predictor_forward(av, h2);
                    loss = simsiam_loss_graph(h1, h2, g1, g2);
                    loss.backward();
                    adam_step(aux, collect_grads(aux, av), aux_opt);
                }
            }
            adam_step(model.params, collect_grads(model.params, pvars), opt);
            if (method == Method::BYOL) byol_update(byol, model.params);
            epoch_loss += loss.item();
            ++batches;
        }
        result.epoch_losses.push_back(epoch_loss / (double)std::max<int64_t>(1, batches));
    }
    result.model = detail::strip_projector(std::move(model));
    return result;
}

}  // namespace steallab
