#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "steallab/data.hpp"
#include "steallab/losses.hpp"
#include "steallab/nn.hpp"
#include "steallab/optim.hpp"

namespace steallab {

// Downstream linear layer trained on frozen embeddings.
struct LinearProbe {
    Tensor weight;  // [classes, embed_dim]
    Tensor bias;    // [classes]
};

struct ProbeHyper {
    int epochs = 100;
    int batch_size = 128;
    double lr = 3e-4;
};

struct EvalResult {
    double agreement = 0.0;
    double accuracy = 0.0;
    int64_t n_eval = 0;
};

inline Tensor probe_logits(const LinearProbe& probe, const Tensor& embeddings) {
    auto e = ad::Var::leaf(embeddings, false);
    return ad::add_rows(ad::matmul_nt(e, ad::Var::leaf(probe.weight, false)),
                        ad::Var::leaf(probe.bias, false))
        .value();
}

// Argmax per row, ties to the lowest class index.
inline std::vector<int> predict_labels(const Tensor& logits) {
    int64_t N = logits.dim(0), C = logits.dim(1);
    std::vector<int> out((size_t)N);
    for (int64_t i = 0; i < N; ++i) {
        int best = 0;
        for (int64_t j = 1; j < C; ++j)
            if (logits.data[i * C + j] > logits.data[i * C + best]) best = (int)j;
        out[(size_t)i] = best;
    }
    return out;
}

// Embeds the whole dataset with the frozen encoder, batched.
inline Tensor embed_dataset(const EncoderModel& encoder, const Dataset& ds, int batch_size = 256) {
    int64_t M = ds.size();
    Tensor out({M, (int64_t)encoder.embed_dim});
    for (int64_t s = 0; s < M; s += batch_size) {
        std::vector<int64_t> idx;
        for (int64_t i = s; i < std::min(M, s + batch_size); ++i) idx.push_back(i);
        Tensor emb = forward_embed(encoder, ds.gather(idx), false);
        std::copy(emb.data.begin(), emb.data.end(), out.data.begin() + s * encoder.embed_dim);
    }
    return out;
}

// Cross-entropy training of the probe only; the encoder stays frozen (its
// parameters are never even touched — we train on precomputed embeddings).
inline LinearProbe train_probe(const EncoderModel& encoder, const Dataset& ds,
                               const ProbeHyper& hyper, uint64_t seed) {
    if (!ds.labels) throw ConfigError("probe training requires labels");
    ds.validate();
    Tensor embeddings = embed_dataset(encoder, ds);
    int64_t M = ds.size(), D = encoder.embed_dim;
    Rng rng(Rng::mix(seed, 0x70726f62ULL));
    ParamTree params;
    {
        NamedTensor w{"probe.weight", Tensor({(int64_t)ds.classes, D})};
        NamedTensor b{"probe.bias", Tensor({(int64_t)ds.classes})};
        detail::init_tensor(w.tensor, (int)D, rng);
        detail::init_tensor(b.tensor, (int)D, rng);
        params.push_back(std::move(w));
        params.push_back(std::move(b));
    }
    AdamState opt = AdamState::init(params, hyper.lr);
    std::vector<int64_t> order((size_t)M);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        Rng sh = Rng::derive(seed, (uint64_t)epoch, 0, 0xbacc);
        for (int64_t i = M - 1; i > 0; --i) std::swap(order[(size_t)i], order[(size_t)sh.uniform_int(i + 1)]);
        for (int64_t s = 0; s < M; s += hyper.batch_size) {
            int64_t e = std::min(M, s + hyper.batch_size);
            Tensor eb({e - s, D});
            std::vector<int> labels;
            for (int64_t b = s; b < e; ++b) {
                std::copy(embeddings.data.begin() + order[(size_t)b] * D,
                          embeddings.data.begin() + (order[(size_t)b] + 1) * D,
                          eb.data.begin() + (b - s) * D);
                labels.push_back((*ds.labels)[(size_t)order[(size_t)b]]);
            }
            auto pv = make_param_vars(params);
            auto logits = ad::add_rows(ad::matmul_nt(ad::Var::leaf(eb, false), pv[0]), pv[1]);
            auto loss = ad::cross_entropy_logits(logits, labels);
            loss.backward();
            adam_step(params, collect_grads(params, pv), opt);
        }
    }
    return LinearProbe{params[0].tensor, params[1].tensor};
}

inline double agreement(const std::vector<int>& preds_s, const std::vector<int>& preds_t) {
    if (preds_s.size() != preds_t.size() || preds_s.empty())
        throw DimensionError("agreement: length mismatch or empty");
    int64_t same = 0;
    for (size_t i = 0; i < preds_s.size(); ++i) same += preds_s[i] == preds_t[i];
    return (double)same / (double)preds_s.size();
}

inline double accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
    return agreement(preds, labels);
}

// CSV rows: sample_id,label,e_1..e_D. Unlabeled samples get label -1.
inline void export_embeddings(const EncoderModel& encoder, const Dataset& ds,
                              const std::string& path) {
    if (ds.size() < 1) throw DataError("empty dataset");
    Tensor emb = embed_dataset(encoder, ds);
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    int64_t D = encoder.embed_dim;
    f << "sample_id,label";
    for (int64_t j = 0; j < D; ++j) f << ",e_" << (j + 1);
    f << "\n";
    char buf[64];
    for (int64_t i = 0; i < ds.size(); ++i) {
        f << i << "," << (ds.labels ? (*ds.labels)[(size_t)i] : -1);
        for (int64_t j = 0; j < D; ++j) {
            std::snprintf(buf, sizeof(buf), "%.9g", (double)emb.data[i * D + j]);
            f << "," << buf;
        }
        f << "\n";
    }
}

}  // namespace steallab
