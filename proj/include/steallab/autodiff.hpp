#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "steallab/tensor.hpp"

// Tape-free reverse-mode engine: each Var owns a node with its value, its
// inputs, and a closure that scatters the node's gradient into the inputs.
// backward() topologically sorts the reachable subgraph and replays it.

namespace steallab::ad {

struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily in backward()
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> backward_fn;  // null for leaves
};

class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    static Var leaf(Tensor value, bool requires_grad) {
        auto n = std::make_shared<Node>();
        n->value = std::move(value);
        n->requires_grad = requires_grad;
        return Var(std::move(n));
    }

    const Tensor& value() const { return node_->value; }
    const Tensor& grad() const { return node_->grad; }
    bool requires_grad() const { return node_->requires_grad; }
    const std::shared_ptr<Node>& node() const { return node_; }
    bool defined() const { return node_ != nullptr; }

    // Scalar extraction for loss values.
    double item() const {
        if (node_->value.numel() != 1) throw DimensionError("item() on non-scalar");
        return node_->value.data[0];
    }

    // Runs reverse-mode from this scalar root.
    void backward() const {
        if (node_->value.numel() != 1) throw DimensionError("backward() root must be scalar");
        std::vector<Node*> order;
        std::unordered_set<Node*> seen;
        std::function<void(Node*)> visit = [&](Node* n) {
            if (!n->requires_grad || seen.count(n)) return;
            seen.insert(n);
            for (auto& in : n->inputs) visit(in.get());
            order.push_back(n);
        };
        visit(node_.get());
        for (Node* n : order) n->grad = Tensor(n->value.shape);
        if (!node_->requires_grad) return;
        node_->grad.data[0] = 1.0f;
        for (auto it = order.rbegin(); it != order.rend(); ++it)
            if ((*it)->backward_fn) (*it)->backward_fn(**it);
    }

private:
    std::shared_ptr<Node> node_;
};

namespace detail {

inline Var make_op(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> bwd) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    for (auto& v : inputs) {
        if (v.requires_grad()) n->requires_grad = true;
        n->inputs.push_back(v.node());
    }
    if (n->requires_grad) n->backward_fn = std::move(bwd);
    return Var(std::move(n));
}

inline void accumulate(Node& dst, const std::vector<float>& g) {
    for (size_t i = 0; i < g.size(); ++i) dst.grad.data[i] += g[i];
}

}  // namespace detail

// Value passes through, gradient does not. The stop-gradient primitive.
inline Var detach(const Var& x) { return Var::leaf(x.value(), false); }

inline Var add(const Var& a, const Var& b) {
    if (!a.value().same_shape(b.value())) throw DimensionError("add: shape mismatch");
    Tensor out = a.value();
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.value().data[i];
    return detail::make_op(std::move(out), {a, b}, [](Node& n) {
        for (int k = 0; k < 2; ++k)
            if (n.inputs[k]->requires_grad) detail::accumulate(*n.inputs[k], n.grad.data);
    });
}

inline Var sub(const Var& a, const Var& b) {
    if (!a.value().same_shape(b.value())) throw DimensionError("sub: shape mismatch");
    Tensor out = a.value();
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.value().data[i];
    return detail::make_op(std::move(out), {a, b}, [](Node& n) {
        if (n.inputs[0]->requires_grad) detail::accumulate(*n.inputs[0], n.grad.data);
        if (n.inputs[1]->requires_grad)
            for (size_t i = 0; i < n.grad.data.size(); ++i) n.inputs[1]->grad.data[i] -= n.grad.data[i];
    });
}

inline Var mul(const Var& a, const Var& b) {
    if (!a.value().same_shape(b.value())) throw DimensionError("mul: shape mismatch");
    Tensor out = a.value();
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.value().data[i];
    return detail::make_op(std::move(out), {a, b}, [](Node& n) {
        for (size_t i = 0; i < n.grad.data.size(); ++i) {
            float g = n.grad.data[i];
            if (n.inputs[0]->requires_grad) n.inputs[0]->grad.data[i] += g * n.inputs[1]->value.data[i];
            if (n.inputs[1]->requires_grad) n.inputs[1]->grad.data[i] += g * n.inputs[0]->value.data[i];
        }
    });
}

inline Var scale(const Var& a, float c) {
    Tensor out = a.value();
    for (auto& v : out.data) v *= c;
    return detail::make_op(std::move(out), {a}, [c](Node& n) {
        for (size_t i = 0; i < n.grad.data.size(); ++i) n.inputs[0]->grad.data[i] += c * n.grad.data[i];
    });
}

// Elementwise multiply by a constant tensor (masks etc.); no gradient to the mask.
inline Var mul_const(const Var& a, Tensor mask) {
    if (!a.value().same_shape(mask)) throw DimensionError("mul_const: shape mismatch");
    Tensor out = a.value();
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= mask.data[i];
    auto m = std::make_shared<Tensor>(std::move(mask));
    return detail::make_op(std::move(out), {a}, [m](Node& n) {
        for (size_t i = 0; i < n.grad.data.size(); ++i)
            n.inputs[0]->grad.data[i] += n.grad.data[i] * m->data[i];
    });
}

inline Var relu(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = v > 0.0f ? v : 0.0f;
    return detail::make_op(std::move(out), {a}, [](Node& n) {
        for (size_t i = 0; i < n.grad.data.size(); ++i)
            if (n.inputs[0]->value.data[i] > 0.0f) n.inputs[0]->grad.data[i] += n.grad.data[i];
    });
}

inline Var exp(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::exp(v);
    return detail::make_op(std::move(out), {a}, [](Node& n) {
        for (size_t i = 0; i < n.grad.data.size(); ++i)
            n.inputs[0]->grad.data[i] += n.grad.data[i] * n.value.data[i];
    });
}

inline Var log(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::log(v);
    return detail::make_op(std::move(out), {a}, [](Node& n) {
        for (size_t i = 0; i < n.grad.data.size(); ++i)
            n.inputs[0]->grad.data[i] += n.grad.data[i] / n.inputs[0]->value.data[i];
    });
}

// C = A @ B, A:[N,K] B:[K,M]
inline Var matmul(const Var& a, const Var& b) {
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0)) throw DimensionError("matmul shapes");
    int64_t N = A.dim(0), K = A.dim(1), M = B.dim(1);
    Tensor out({N, M});
    for (int64_t i = 0; i < N; ++i)
        for (int64_t k = 0; k < K; ++k) {
            float av = A.data[i * K + k];
            if (av == 0.0f) continue;
            for (int64_t j = 0; j < M; ++j) out.data[i * M + j] += av * B.data[k * M + j];
        }
    return detail::make_op(std::move(out), {a, b}, [N, K, M](Node& n) {
        const auto& G = n.grad.data;
        if (n.inputs[0]->requires_grad) {
            auto& dA = n.inputs[0]->grad.data;
            const auto& Bv = n.inputs[1]->value.data;
            for (int64_t i = 0; i < N; ++i)
                for (int64_t j = 0; j < M; ++j) {
                    float g = G[i * M + j];
                    if (g == 0.0f) continue;
                    for (int64_t k = 0; k < K; ++k) dA[i * K + k] += g * Bv[k * M + j];
                }
        }
        if (n.inputs[1]->requires_grad) {
            auto& dB = n.inputs[1]->grad.data;
            const auto& Av = n.inputs[0]->value.data;
            for (int64_t i = 0; i < N; ++i)
                for (int64_t k = 0; k < K; ++k) {
                    float av = Av[i * K + k];
                    if (av == 0.0f) continue;
                    for (int64_t j = 0; j < M; ++j) dB[k * M + j] += av * G[i * M + j];
                }
        }
    });
}

// C = A @ B^T, A:[N,K] B:[M,K]. Similarity matrices.
inline Var matmul_nt(const Var& a, const Var& b) {
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(1)) throw DimensionError("matmul_nt shapes");
    int64_t N = A.dim(0), K = A.dim(1), M = B.dim(0);
    Tensor out({N, M});
    for (int64_t i = 0; i < N; ++i)
        for (int64_t j = 0; j < M; ++j) {
            double s = 0.0;
            for (int64_t k = 0; k < K; ++k) s += (double)A.data[i * K + k] * B.data[j * K + k];
            out.data[i * M + j] = (float)s;
        }
    return detail::make_op(std::move(out), {a, b}, [N, K, M](Node& n) {
        const auto& G = n.grad.data;
        const auto& Av = n.inputs[0]->value.data;
        const auto& Bv = n.inputs[1]->value.data;
        for (int64_t i = 0; i < N; ++i)
            for (int64_t j = 0; j < M; ++j) {
                float g = G[i * M + j];
                if (g == 0.0f) continue;
                if (n.inputs[0]->requires_grad)
                    for (int64_t k = 0; k < K; ++k) n.inputs[0]->grad.data[i * K + k] += g * Bv[j * K + k];
                if (n.inputs[1]->requires_grad)
                    for (int64_t k = 0; k < K; ++k) n.inputs[1]->grad.data[j * K + k] += g * Av[i * K + k];
            }
    });
}

// [N,D] + [D] broadcast over rows (bias add).
inline Var add_rows(const Var& a, const Var& bias) {
    const Tensor& A = a.value();
    const Tensor& B = bias.value();
    if (A.rank() != 2 || B.rank() != 1 || A.dim(1) != B.dim(0)) throw DimensionError("add_rows shapes");
    int64_t N = A.dim(0), D = A.dim(1);
    Tensor out = A;
    for (int64_t i = 0; i < N; ++i)
        for (int64_t j = 0; j < D; ++j) out.data[i * D + j] += B.data[j];
    return detail::make_op(std::move(out), {a, bias}, [N, D](Node& n) {
        if (n.inputs[0]->requires_grad) detail::accumulate(*n.inputs[0], n.grad.data);
        if (n.inputs[1]->requires_grad)
            for (int64_t i = 0; i < N; ++i)
                for (int64_t j = 0; j < D; ++j) n.inputs[1]->grad.data[j] += n.grad.data[i * D + j];
    });
}

// Row-wise dot product of two [N,D] matrices -> [N].
inline Var rowwise_dot(const Var& a, const Var& b) {
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    if (!A.same_shape(B) || A.rank() != 2) throw DimensionError("rowwise_dot shapes");
    int64_t N = A.dim(0), D = A.dim(1);
    Tensor out({N});
    for (int64_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < D; ++j) s += (double)A.data[i * D + j] * B.data[i * D + j];
        out.data[i] = (float)s;
    }
    return detail::make_op(std::move(out), {a, b}, [N, D](Node& n) {
        for (int64_t i = 0; i < N; ++i) {
            float g = n.grad.data[i];
            for (int64_t j = 0; j < D; ++j) {
                if (n.inputs[0]->requires_grad)
                    n.inputs[0]->grad.data[i * D + j] += g * n.inputs[1]->value.data[i * D + j];
                if (n.inputs[1]->requires_grad)
                    n.inputs[1]->grad.data[i * D + j] += g * n.inputs[0]->value.data[i * D + j];
            }
        }
    });
}

// [N,M] -> [N], sums each row in double precision.
inline Var row_sum(const Var& a) {
    const Tensor& A = a.value();
    if (A.rank() != 2) throw DimensionError("row_sum expects rank 2");
    int64_t N = A.dim(0), M = A.dim(1);
    Tensor out({N});
    for (int64_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < M; ++j) s += A.data[i * M + j];
        out.data[i] = (float)s;
    }
    return detail::make_op(std::move(out), {a}, [N, M](Node& n) {
        for (int64_t i = 0; i < N; ++i)
            for (int64_t j = 0; j < M; ++j) n.inputs[0]->grad.data[i * M + j] += n.grad.data[i];
    });
}

inline Var sum_all(const Var& a) {
    double s = 0.0;
    for (float v : a.value().data) s += v;
    Tensor out({1});
    out.data[0] = (float)s;
    return detail::make_op(std::move(out), {a}, [](Node& n) {
        float g = n.grad.data[0];
        for (auto& d : n.inputs[0]->grad.data) d += g;
    });
}

inline Var mean_all(const Var& a) { return scale(sum_all(a), 1.0f / (float)a.value().numel()); }

// Row-wise L2 normalization of [N,D]; throws on zero-norm rows.
inline Var l2_normalize_rows(const Var& a, float min_norm = 1e-12f) {
    const Tensor& A = a.value();
    if (A.rank() != 2) throw DimensionError("l2_normalize_rows expects rank 2");
    int64_t N = A.dim(0), D = A.dim(1);
    Tensor out({N, D});
    std::vector<float> norms((size_t)N);
    for (int64_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < D; ++j) s += (double)A.data[i * D + j] * A.data[i * D + j];
        float nrm = (float)std::sqrt(s);
        if (nrm <= min_norm) throw DegenerateInputError("zero-norm row " + std::to_string(i));
        norms[(size_t)i] = nrm;
        for (int64_t j = 0; j < D; ++j) out.data[i * D + j] = A.data[i * D + j] / nrm;
    }
    return detail::make_op(std::move(out), {a}, [N, D, norms](Node& n) {
        // d(x/||x||) = (g - x̂ (x̂·g)) / ||x||
        for (int64_t i = 0; i < N; ++i) {
            double dot = 0.0;
            for (int64_t j = 0; j < D; ++j) dot += (double)n.grad.data[i * D + j] * n.value.data[i * D + j];
            for (int64_t j = 0; j < D; ++j)
                n.inputs[0]->grad.data[i * D + j] +=
                    (n.grad.data[i * D + j] - (float)dot * n.value.data[i * D + j]) / norms[(size_t)i];
        }
    });
}

// Row-wise softmax of logits [N,C].
inline Var softmax_rows(const Var& a) {
    const Tensor& A = a.value();
    if (A.rank() != 2) throw DimensionError("softmax_rows expects rank 2");
    int64_t N = A.dim(0), C = A.dim(1);
    Tensor out({N, C});
    for (int64_t i = 0; i < N; ++i) {
        float mx = A.data[i * C];
        for (int64_t j = 1; j < C; ++j) mx = std::max(mx, A.data[i * C + j]);
        double z = 0.0;
        for (int64_t j = 0; j < C; ++j) z += std::exp((double)A.data[i * C + j] - mx);
        for (int64_t j = 0; j < C; ++j)
            out.data[i * C + j] = (float)(std::exp((double)A.data[i * C + j] - mx) / z);
    }
    return detail::make_op(std::move(out), {a}, [N, C](Node& n) {
        for (int64_t i = 0; i < N; ++i) {
            double dot = 0.0;
            for (int64_t j = 0; j < C; ++j) dot += (double)n.grad.data[i * C + j] * n.value.data[i * C + j];
            for (int64_t j = 0; j < C; ++j)
                n.inputs[0]->grad.data[i * C + j] +=
                    n.value.data[i * C + j] * (n.grad.data[i * C + j] - (float)dot);
        }
    });
}

// Mean cross-entropy of logits [N,C] against integer labels; stable logsumexp.
inline Var cross_entropy_logits(const Var& logits, const std::vector<int>& labels) {
    const Tensor& A = logits.value();
    if (A.rank() != 2) throw DimensionError("cross_entropy expects rank 2 logits");
    int64_t N = A.dim(0), C = A.dim(1);
    if ((int64_t)labels.size() != N) throw DimensionError("label count != batch");
    for (int y : labels)
        if (y < 0 || y >= C) throw DataError("label out of range: " + std::to_string(y));
    Tensor probs({N, C});
    double loss = 0.0;
    for (int64_t i = 0; i < N; ++i) {
        float mx = A.data[i * C];
        for (int64_t j = 1; j < C; ++j) mx = std::max(mx, A.data[i * C + j]);
        double z = 0.0;
        for (int64_t j = 0; j < C; ++j) z += std::exp((double)A.data[i * C + j] - mx);
        for (int64_t j = 0; j < C; ++j)
            probs.data[i * C + j] = (float)(std::exp((double)A.data[i * C + j] - mx) / z);
        loss -= (double)A.data[i * C + labels[i]] - mx - std::log(z);
    }
    Tensor out({1});
    out.data[0] = (float)(loss / (double)N);
    auto p = std::make_shared<Tensor>(std::move(probs));
    auto labs = std::make_shared<std::vector<int>>(labels);
    return detail::make_op(std::move(out), {logits}, [N, C, p, labs](Node& n) {
        float g = n.grad.data[0] / (float)N;
        for (int64_t i = 0; i < N; ++i)
            for (int64_t j = 0; j < C; ++j)
                n.inputs[0]->grad.data[i * C + j] +=
                    g * (p->data[i * C + j] - (j == (*labs)[(size_t)i] ? 1.0f : 0.0f));
    });
}

// conv2d, stride 1, symmetric zero padding. x:[B,Ci,H,W] w:[Co,Ci,kh,kw] b:[Co]
inline Var conv2d(const Var& x, const Var& w, const Var& bias, int pad) {
    const Tensor& X = x.value();
    const Tensor& W = w.value();
    if (X.rank() != 4 || W.rank() != 4 || X.dim(1) != W.dim(1)) throw DimensionError("conv2d shapes");
    int64_t B = X.dim(0), Ci = X.dim(1), H = X.dim(2), Wd = X.dim(3);
    int64_t Co = W.dim(0), kh = W.dim(2), kw = W.dim(3);
    int64_t Ho = H + 2 * pad - kh + 1, Wo = Wd + 2 * pad - kw + 1;
    if (Ho <= 0 || Wo <= 0) throw DimensionError("conv2d: kernel larger than padded input");
    if (bias.value().rank() != 1 || bias.value().dim(0) != Co) throw DimensionError("conv2d bias shape");
    Tensor out({B, Co, Ho, Wo});
    auto xat = [&](int64_t b, int64_t c, int64_t i, int64_t j) -> float {
        if (i < 0 || j < 0 || i >= H || j >= Wd) return 0.0f;
        return X.data[((b * Ci + c) * H + i) * Wd + j];
    };
    for (int64_t b = 0; b < B; ++b)
        for (int64_t o = 0; o < Co; ++o)
            for (int64_t i = 0; i < Ho; ++i)
                for (int64_t j = 0; j < Wo; ++j) {
                    double s = bias.value().data[o];
                    for (int64_t c = 0; c < Ci; ++c)
                        for (int64_t u = 0; u < kh; ++u)
                            for (int64_t v = 0; v < kw; ++v)
                                s += (double)W.data[((o * Ci + c) * kh + u) * kw + v] *
                                     xat(b, c, i + u - pad, j + v - pad);
                    out.data[((b * Co + o) * Ho + i) * Wo + j] = (float)s;
                }
    return detail::make_op(std::move(out), {x, w, bias}, [=](Node& n) {
        const Tensor& Xv = n.inputs[0]->value;
        const Tensor& Wv = n.inputs[1]->value;
        const auto& G = n.grad.data;
        bool gx = n.inputs[0]->requires_grad, gw = n.inputs[1]->requires_grad,
             gb = n.inputs[2]->requires_grad;
        for (int64_t b = 0; b < B; ++b)
            for (int64_t o = 0; o < Co; ++o)
                for (int64_t i = 0; i < Ho; ++i)
                    for (int64_t j = 0; j < Wo; ++j) {
                        float g = G[((b * Co + o) * Ho + i) * Wo + j];
                        if (g == 0.0f) continue;
                        if (gb) n.inputs[2]->grad.data[o] += g;
                        for (int64_t c = 0; c < Ci; ++c)
                            for (int64_t u = 0; u < kh; ++u)
                                for (int64_t v = 0; v < kw; ++v) {
                                    int64_t ii = i + u - pad, jj = j + v - pad;
                                    if (ii < 0 || jj < 0 || ii >= H || jj >= Wd) continue;
                                    size_t xi = ((b * Ci + c) * H + ii) * Wd + jj;
                                    size_t wi = ((o * Ci + c) * kh + u) * kw + v;
                                    if (gw) n.inputs[1]->grad.data[wi] += g * Xv.data[xi];
                                    if (gx) n.inputs[0]->grad.data[xi] += g * Wv.data[wi];
                                }
                    }
    });
}

// 2x2 average pooling, stride 2; odd trailing row/col dropped.
inline Var avgpool2(const Var& x) {
    const Tensor& X = x.value();
    if (X.rank() != 4) throw DimensionError("avgpool2 expects rank 4");
    int64_t B = X.dim(0), C = X.dim(1), H = X.dim(2), W = X.dim(3);
    int64_t Ho = H / 2, Wo = W / 2;
    if (Ho == 0 || Wo == 0) throw DimensionError("avgpool2: input too small");
    Tensor out({B, C, Ho, Wo});
    for (int64_t b = 0; b < B; ++b)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t i = 0; i < Ho; ++i)
                for (int64_t j = 0; j < Wo; ++j) {
                    size_t base = (b * C + c) * H;
                    float s = X.data[(base + 2 * i) * W + 2 * j] + X.data[(base + 2 * i) * W + 2 * j + 1] +
                              X.data[(base + 2 * i + 1) * W + 2 * j] +
                              X.data[(base + 2 * i + 1) * W + 2 * j + 1];
                    out.data[((b * C + c) * Ho + i) * Wo + j] = 0.25f * s;
                }
    return detail::make_op(std::move(out), {x}, [=](Node& n) {
        for (int64_t b = 0; b < B; ++b)
            for (int64_t c = 0; c < C; ++c)
                for (int64_t i = 0; i < Ho; ++i)
                    for (int64_t j = 0; j < Wo; ++j) {
                        float g = 0.25f * n.grad.data[((b * C + c) * Ho + i) * Wo + j];
                        size_t base = (b * C + c) * H;
                        n.inputs[0]->grad.data[(base + 2 * i) * W + 2 * j] += g;
                        n.inputs[0]->grad.data[(base + 2 * i) * W + 2 * j + 1] += g;
                        n.inputs[0]->grad.data[(base + 2 * i + 1) * W + 2 * j] += g;
                        n.inputs[0]->grad.data[(base + 2 * i + 1) * W + 2 * j + 1] += g;
                    }
    });
}

// [B,C,H,W] -> [B,C] spatial mean.
inline Var global_avg_pool(const Var& x) {
    const Tensor& X = x.value();
    if (X.rank() != 4) throw DimensionError("global_avg_pool expects rank 4");
    int64_t B = X.dim(0), C = X.dim(1), HW = X.dim(2) * X.dim(3);
    Tensor out({B, C});
    for (int64_t b = 0; b < B; ++b)
        for (int64_t c = 0; c < C; ++c) {
            double s = 0.0;
            for (int64_t k = 0; k < HW; ++k) s += X.data[(b * C + c) * HW + k];
            out.data[b * C + c] = (float)(s / (double)HW);
        }
    return detail::make_op(std::move(out), {x}, [=](Node& n) {
        float inv = 1.0f / (float)HW;
        for (int64_t b = 0; b < B; ++b)
            for (int64_t c = 0; c < C; ++c) {
                float g = n.grad.data[b * C + c] * inv;
                for (int64_t k = 0; k < HW; ++k) n.inputs[0]->grad.data[(b * C + c) * HW + k] += g;
            }
    });
}

// [B,C,H,W] -> [B,C*H*W] view.
inline Var flatten(const Var& x) {
    const Tensor& X = x.value();
    if (X.rank() < 2) throw DimensionError("flatten expects rank >= 2");
    int64_t B = X.dim(0);
    Tensor out({B, X.numel() / B}, X.data);
    return detail::make_op(std::move(out), {x}, [](Node& n) {
        detail::accumulate(*n.inputs[0], n.grad.data);
    });
}

}  // namespace steallab::ad
