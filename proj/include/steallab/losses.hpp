#pragma once

#include "steallab/autodiff.hpp"
#include "steallab/tensor.hpp"

// Contrastive and imitation losses. All graph builders return a scalar Var;
// *_value wrappers evaluate without keeping gradients. Cosine similarities
// come from row-normalized embedding products, so every loss is invariant to
// positive rescaling of the embeddings.

namespace steallab {

namespace detail {

inline Tensor offdiag_mask(int64_t n) {
    Tensor m({n, n});
    m.fill(1.0f);
    for (int64_t i = 0; i < n; ++i) m.data[i * n + i] = 0.0f;
    return m;
}

inline Tensor diag_mask(int64_t n) {
    Tensor m({n, n});
    for (int64_t i = 0; i < n; ++i) m.data[i * n + i] = 1.0f;
    return m;
}

inline void check_tau(double tau) {
    if (tau <= 0.0) throw ConfigError("temperature must be positive");
}

}  // namespace detail

// One direction of the NT-Xent pair loss on a 2N-row embedding batch:
// l(i,j) = -log( e^{sim(z_i,z_j)/tau} / sum_{k != i} e^{sim(z_i,z_k)/tau} ).
inline ad::Var simclr_pair_loss_graph(const ad::Var& z, int64_t i, int64_t j, double tau) {
    detail::check_tau(tau);
    const Tensor& Z = z.value();
    if (Z.rank() != 2 || Z.dim(0) < 2) throw DimensionError("simclr_pair_loss needs >= 2 rows");
    int64_t n = Z.dim(0);
    if (i == j || i < 0 || j < 0 || i >= n || j >= n) throw DimensionError("bad pair indices");
    auto zn = ad::l2_normalize_rows(z);
    auto e = ad::exp(ad::scale(ad::matmul_nt(zn, zn), (float)(1.0 / tau)));
    Tensor num_mask({n, n}), den_mask({n, n});
    num_mask.data[i * n + j] = 1.0f;
    for (int64_t k = 0; k < n; ++k)
        if (k != i) den_mask.data[i * n + k] = 1.0f;
    auto num = ad::sum_all(ad::mul_const(e, std::move(num_mask)));
    auto den = ad::sum_all(ad::mul_const(e, std::move(den_mask)));
    return ad::sub(ad::log(den), ad::log(num));
}

// Mini-batch NT-Xent over 2N rows where rows (2k, 2k+1) are positive pairs:
// mean of l(2k,2k+1) and l(2k+1,2k) over all k.
inline ad::Var simclr_batch_loss_graph(const ad::Var& z, double tau) {
    detail::check_tau(tau);
    const Tensor& Z = z.value();
    if (Z.rank() != 2) throw DimensionError("simclr_batch_loss expects rank 2");
    int64_t n = Z.dim(0);
    if (n % 2 != 0 || n < 2) throw DimensionError("simclr_batch_loss needs an even row count");
    auto zn = ad::l2_normalize_rows(z);
    auto e = ad::exp(ad::scale(ad::matmul_nt(zn, zn), (float)(1.0 / tau)));
    Tensor pair_mask({n, n});
    for (int64_t k = 0; k < n; k += 2) {
        pair_mask.data[k * n + k + 1] = 1.0f;
        pair_mask.data[(k + 1) * n + k] = 1.0f;
    }
    auto num = ad::row_sum(ad::mul_const(e, std::move(pair_mask)));
    auto den = ad::row_sum(ad::mul_const(e, detail::offdiag_mask(n)));
    return ad::mean_all(ad::sub(ad::log(den), ad::log(num)));
}

// InfoNCE against a momentum-encoder dictionary. q:[N,D] carries gradient;
// k_pos:[N,D] and the queue are gradient-free keys. Queue rows must be
// L2-normalized already (the MoCo state maintains that invariant).
inline ad::Var moco_loss_graph(const ad::Var& q, const ad::Var& k_pos, const Tensor& queue,
                               double tau) {
    detail::check_tau(tau);
    const Tensor& Q = q.value();
    if (Q.rank() != 2 || !Q.same_shape(k_pos.value())) throw DimensionError("moco_loss shapes");
    auto qn = ad::l2_normalize_rows(q);
    auto kn = ad::detach(ad::l2_normalize_rows(ad::detach(k_pos)));
    auto pos = ad::scale(ad::rowwise_dot(qn, kn), (float)(1.0 / tau));  // [N]
    auto e_pos = ad::exp(pos);
    ad::Var den;
    if (queue.data.empty()) {
        den = e_pos;
    } else {
        if (queue.rank() != 2 || queue.dim(1) != Q.dim(1)) throw DimensionError("queue width");
        auto e_q = ad::exp(ad::scale(ad::matmul_nt(qn, ad::Var::leaf(queue, false)), (float)(1.0 / tau)));
        den = ad::add(e_pos, ad::row_sum(e_q));
    }
    return ad::mean_all(ad::sub(ad::log(den), pos));
}

// Normalized-MSE regression of online outputs onto EMA-target outputs:
// || on/||on|| - tg/||tg|| ||^2 = 2 - 2 cos(on, tg), meaned over rows.
// Gradient flows only through the online branch.
inline ad::Var byol_loss_graph(const ad::Var& online_out, const ad::Var& target_out) {
    const Tensor& A = online_out.value();
    if (A.rank() != 2 || !A.same_shape(target_out.value())) throw DimensionError("byol_loss shapes");
    auto on = ad::l2_normalize_rows(online_out);
    auto tg = ad::detach(ad::l2_normalize_rows(ad::detach(target_out)));
    auto cos = ad::rowwise_dot(on, tg);
    Tensor two({A.dim(0)});
    two.fill(2.0f);
    return ad::mean_all(ad::sub(ad::Var::leaf(std::move(two), false), ad::scale(cos, 2.0f)));
}

// Symmetric negative cosine with stop-gradient on the raw-embedding side:
// -( sim(sg(h_i), p_j) + sim(sg(h_j), p_i) ) / 2 meaned over the batch.
inline ad::Var simsiam_loss_graph(const ad::Var& h_i, const ad::Var& h_j, const ad::Var& p_i,
                                  const ad::Var& p_j) {
    const Tensor& A = h_i.value();
    if (A.rank() != 2 || !A.same_shape(h_j.value()) || !p_i.value().same_shape(p_j.value()))
        throw DimensionError("simsiam_loss shapes");
    auto hi = ad::detach(ad::l2_normalize_rows(ad::detach(h_i)));
    auto hj = ad::detach(ad::l2_normalize_rows(ad::detach(h_j)));
    auto pi = ad::l2_normalize_rows(p_i);
    auto pj = ad::l2_normalize_rows(p_j);
    auto s = ad::add(ad::rowwise_dot(hi, pj), ad::rowwise_dot(hj, pi));
    return ad::mean_all(ad::scale(s, -0.5f));
}

// Mean squared error over all elements; the conventional encoder-stealing loss.
inline ad::Var mse_loss_graph(const ad::Var& pred, const ad::Var& target) {
    if (!pred.value().same_shape(target.value())) throw DimensionError("mse_loss shapes");
    auto d = ad::sub(pred, ad::detach(target));
    return ad::mean_all(ad::mul(d, d));
}

struct ContStealFlags {
    bool include_d_self = true;
    bool include_d_encoder_negatives = true;
};

// Contrastive stealing loss. Row i of emb_s and emb_t are the surrogate/target
// embeddings of the two views of sample i; the target side is gradient-free.
// Per sample: l(i) = -log( D+ / (D-_encoder + D-_self) ) with
//   D+          = e^{sim(s_i, t_i)/tau}
//   D-_encoder  = sum_k e^{sim(s_i, t_k)/tau}      (includes k = i)
//   D-_self     = sum_{k != i} e^{sim(s_i, s_k)/tau}
// Flags zero out D-_self and/or replace D-_encoder by D+ alone (ablations).
inline ad::Var cont_steal_loss_graph(const ad::Var& emb_s, const ad::Var& emb_t, double tau,
                                     ContStealFlags flags = {}) {
    detail::check_tau(tau);
    const Tensor& S = emb_s.value();
    if (S.rank() != 2) throw DimensionError("cont_steal_loss expects rank 2");
    if (!S.same_shape(emb_t.value())) throw DimensionError("cont_steal_loss: emb_s/emb_t shapes differ");
    int64_t n = S.dim(0);
    auto sn = ad::l2_normalize_rows(emb_s);
    auto tn = ad::detach(ad::l2_normalize_rows(ad::detach(emb_t)));
    auto e_cross = ad::exp(ad::scale(ad::matmul_nt(sn, tn), (float)(1.0 / tau)));  // [N,N]
    auto d_pos = ad::row_sum(ad::mul_const(e_cross, detail::diag_mask(n)));
    ad::Var den = flags.include_d_encoder_negatives ? ad::row_sum(e_cross) : d_pos;
    if (flags.include_d_self && n > 1) {
        auto e_self = ad::exp(ad::scale(ad::matmul_nt(sn, sn), (float)(1.0 / tau)));
        den = ad::add(den, ad::row_sum(ad::mul_const(e_self, detail::offdiag_mask(n))));
    }
    return ad::mean_all(ad::sub(ad::log(den), ad::log(d_pos)));
}

// Value-only conveniences.

inline double simclr_pair_loss(const Tensor& z, int64_t i, int64_t j, double tau) {
    return simclr_pair_loss_graph(ad::Var::leaf(z, false), i, j, tau).item();
}

inline double simclr_batch_loss(const Tensor& z, double tau) {
    return simclr_batch_loss_graph(ad::Var::leaf(z, false), tau).item();
}

inline double byol_loss(const Tensor& online_out, const Tensor& target_out) {
    auto as_row = [](const Tensor& t) {
        return t.rank() == 1 ? Tensor({1, t.dim(0)}, t.data) : t;
    };
    return byol_loss_graph(ad::Var::leaf(as_row(online_out), false),
                           ad::Var::leaf(as_row(target_out), false))
        .item();
}

inline double cont_steal_loss(const Tensor& emb_s, const Tensor& emb_t, double tau,
                              ContStealFlags flags = {}) {
    return cont_steal_loss_graph(ad::Var::leaf(emb_s, false), ad::Var::leaf(emb_t, false), tau, flags)
        .item();
}

}  // namespace steallab
