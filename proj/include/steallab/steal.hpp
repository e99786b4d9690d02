#pragma once

#include <string>
#include <vector>

#include "steallab/augment.hpp"
#include "steallab/oracle.hpp"
#include "steallab/pretrain.hpp"

namespace steallab {

enum class Attack { ConvClassifier, ConvEncoder, ContSteal };

inline Attack parse_attack(const std::string& s) {
    if (s == "conv-classifier") return Attack::ConvClassifier;
    if (s == "conv-encoder") return Attack::ConvEncoder;
    if (s == "cont-steal") return Attack::ContSteal;
    throw ConfigError("unknown attack '" + s + "'");
}

inline std::string attack_name(Attack a) {
    switch (a) {
        case Attack::ConvClassifier: return "conv-classifier";
        case Attack::ConvEncoder: return "conv-encoder";
        case Attack::ContSteal: return "cont-steal";
    }
    return "?";
}

struct StealConfig {
    Attack attack = Attack::ContSteal;
    double tau = 0.5;
    int epochs = 30;
    int batch_size = 64;
    double lr = 1e-3;
    bool include_d_self = true;
    bool include_d_encoder_negatives = true;
    AugmentPolicy augment;
    uint64_t seed = 0;

    void validate() const {
        if (tau <= 0.0) throw ConfigError("tau must be positive");
        if (epochs < 0 || batch_size < 1) throw ConfigError("bad epochs/batch_size");
    }
};

struct StealResult {
    EncoderModel surrogate;               // classifier attacks also fill `head`
    std::optional<LinearProbe> head;
    std::vector<double> epoch_losses;
    int64_t queries_used = 0;
    bool budget_exhausted = false;        // stopped cleanly mid-run
};

namespace detail {

template <typename Step>
StealResult steal_loop(TargetOracle& oracle, const Dataset& ds, EncoderModel surrogate,
                       ParamTree* head, const StealConfig& cfg, Step&& step) {
    AdamState opt = AdamState::init(surrogate.params, cfg.lr);
    AdamState head_opt;
    if (head) head_opt = AdamState::init(*head, cfg.lr);
    StealResult result;
    int64_t start_count = oracle.query_count();
    for (int epoch = 0; epoch < cfg.epochs && !result.budget_exhausted; ++epoch) {
        double epoch_loss = 0.0;
        int64_t batches = 0;
        for (const auto& idx : epoch_batches(ds.size(), cfg.batch_size, cfg.seed, (uint64_t)epoch)) {
            auto pvars = make_param_vars(surrogate.params);
            std::vector<ad::Var> hvars;
            if (head) hvars = make_param_vars(*head);
            ad::Var loss;
            try {
                loss = step(epoch, idx, pvars, hvars);
            } catch (const BudgetExhaustedError&) {
                result.budget_exhausted = true;
                break;
            }
            loss.backward();
            adam_step(surrogate.params, collect_grads(surrogate.params, pvars), opt);
            if (head) adam_step(*head, collect_grads(*head, hvars), head_opt);
            epoch_loss += loss.item();
            ++batches;
        }
        if (batches > 0) result.epoch_losses.push_back(epoch_loss / (double)batches);
    }
    result.queries_used = oracle.query_count() - start_count;
    result.surrogate = std::move(surrogate);
    return result;
}

}  // namespace detail

// Conventional attack on a classifier oracle: imitate labels with
// cross-entropy or posteriors with MSE. Returns surrogate encoder + head.
inline StealResult conv_steal_classifier(TargetOracle& oracle, const Dataset& ds,
                                         const ArchSpec& surrogate_arch, const StealConfig& cfg) {
    cfg.validate();
    if (oracle.response_type() == ResponseType::Embedding)
        throw ConfigError("classifier stealing needs a label or posterior oracle");
    int classes = (int)oracle.probe()->weight.dim(0);
    EncoderModel surrogate = init_model(surrogate_arch, cfg.seed);
    ParamTree head;
    Rng rng(Rng::mix(cfg.seed, 0x73686561ULL));
    detail::push_linear(head, "cls", surrogate_arch.embed_dim, classes, rng);
    auto res = detail::steal_loop(
        oracle, ds, std::move(surrogate), &head, cfg,
        [&](int, const std::vector<int64_t>& idx, std::vector<ad::Var>& pvars,
            std::vector<ad::Var>& hvars) {
            Tensor batch = ds.gather(idx);
            Response r = oracle.query(batch);
            EncoderModel view{surrogate_arch, {}, surrogate_arch.embed_dim};
            auto h = forward_graph(view, pvars, ad::Var::leaf(batch, false), false);
            auto logits = detail::linear(h, hvars[0], hvars[1]);
            if (r.type == ResponseType::Label) return ad::cross_entropy_logits(logits, r.labels);
            if ((int)r.values.dim(1) != classes)
                throw ConfigError("posterior class count != surrogate head");
            return mse_loss_graph(ad::softmax_rows(logits), ad::Var::leaf(r.values, false));
        });
    res.head = LinearProbe{head[0].tensor, head[1].tensor};
    return res;
}

// Conventional attack on an encoder oracle: per-sample MSE against target
// embeddings of the original (unaugmented) images.
inline StealResult conv_steal_encoder(TargetOracle& oracle, const Dataset& ds,
                                      const ArchSpec& surrogate_arch, const StealConfig& cfg) {
    cfg.validate();
    if (oracle.response_type() != ResponseType::Embedding)
        throw ConfigError("encoder stealing needs an embedding oracle");
    if (surrogate_arch.embed_dim != oracle.model().embed_dim)
        throw ConfigError("embedding dimension mismatch: target " +
                          std::to_string(oracle.model().embed_dim) + " vs surrogate " +
                          std::to_string(surrogate_arch.embed_dim));
    EncoderModel surrogate = init_model(surrogate_arch, cfg.seed);
    return detail::steal_loop(
        oracle, ds, std::move(surrogate), nullptr, cfg,
        [&](int, const std::vector<int64_t>& idx, std::vector<ad::Var>& pvars,
            std::vector<ad::Var>&) {
            Tensor batch = ds.gather(idx);
            Response r = oracle.query(batch);
            EncoderModel view{surrogate_arch, {}, surrogate_arch.embed_dim};
            auto h = forward_graph(view, pvars, ad::Var::leaf(batch, false), false);
            return mse_loss_graph(h, ad::Var::leaf(r.values, false));
        });
}

// Cont-Steal: per batch, two augmented views per sample; the target sees one
// view, the surrogate trains on the other under the contrastive steal loss.
inline StealResult cont_steal_train(TargetOracle& oracle, const Dataset& ds,
                                    const ArchSpec& surrogate_arch, const StealConfig& cfg) {
    cfg.validate();
    if (oracle.response_type() != ResponseType::Embedding)
        throw ConfigError("cont-steal needs an embedding oracle");
    if (surrogate_arch.embed_dim != oracle.model().embed_dim)
        throw ConfigError("embedding dimension mismatch: target " +
                          std::to_string(oracle.model().embed_dim) + " vs surrogate " +
                          std::to_string(surrogate_arch.embed_dim));
    EncoderModel surrogate = init_model(surrogate_arch, cfg.seed);
    AugmentPolicy policy = cfg.augment;
    policy.rng_seed = Rng::mix(policy.rng_seed, cfg.seed);
    ContStealFlags flags{cfg.include_d_self, cfg.include_d_encoder_negatives};
    return detail::steal_loop(
        oracle, ds, std::move(surrogate), nullptr, cfg,
        [&](int epoch, const std::vector<int64_t>& idx, std::vector<ad::Var>& pvars,
            std::vector<ad::Var>&) {
            Tensor batch = ds.gather(idx);
            auto [vt, vs] = make_views(batch, policy, (uint64_t)epoch, idx);
            Response r = oracle.query(vt);
            EncoderModel view{surrogate_arch, {}, surrogate_arch.embed_dim};
            auto emb_s = forward_graph(view, pvars, ad::Var::leaf(vs, false), false);
            return cont_steal_loss_graph(emb_s, ad::Var::leaf(r.values, false), cfg.tau, flags);
        });
}

inline StealResult run_attack(TargetOracle& oracle, const Dataset& ds,
                              const ArchSpec& surrogate_arch, const StealConfig& cfg) {
    switch (cfg.attack) {
        case Attack::ConvClassifier: return conv_steal_classifier(oracle, ds, surrogate_arch, cfg);
        case Attack::ConvEncoder: return conv_steal_encoder(oracle, ds, surrogate_arch, cfg);
        case Attack::ContSteal: return cont_steal_train(oracle, ds, surrogate_arch, cfg);
    }
    throw ConfigError("unknown attack");
}

}  // namespace steallab
