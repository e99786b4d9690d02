#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "steallab/tensor.hpp"

// RandAugment-style policy: n ops drawn uniformly with replacement from an op
// set, each applied at a strength scaled by m/30. The op set is a
// resolution-appropriate subset of the usual 14 ops; magnitude mappings are
// noted per op below.

namespace steallab {

enum class AugOp {
    Identity,
    HFlip,
    RandomResizedCrop,  // crop scale in [1 - 0.5*mag, 1], nearest resize back
    Brightness,         // multiply by factor in [1-0.8*mag, 1+0.8*mag]
    Contrast,           // blend toward mean with weight up to 0.8*mag
    ChannelDrop,        // scale one random channel down by up to mag (color-jitter proxy)
    Cutout,             // zero a square patch of side up to 0.6*mag*min(H,W)
    GaussianNoise,      // additive N(0, (0.3*mag)^2)
};

inline AugOp parse_aug_op(const std::string& s) {
    if (s == "identity") return AugOp::Identity;
    if (s == "hflip") return AugOp::HFlip;
    if (s == "crop") return AugOp::RandomResizedCrop;
    if (s == "brightness") return AugOp::Brightness;
    if (s == "contrast") return AugOp::Contrast;
    if (s == "channel-drop") return AugOp::ChannelDrop;
    if (s == "cutout") return AugOp::Cutout;
    if (s == "noise") return AugOp::GaussianNoise;
    throw ConfigError("unknown augmentation op '" + s + "'");
}

inline std::string aug_op_name(AugOp op) {
    switch (op) {
        case AugOp::Identity: return "identity";
        case AugOp::HFlip: return "hflip";
        case AugOp::RandomResizedCrop: return "crop";
        case AugOp::Brightness: return "brightness";
        case AugOp::Contrast: return "contrast";
        case AugOp::ChannelDrop: return "channel-drop";
        case AugOp::Cutout: return "cutout";
        case AugOp::GaussianNoise: return "noise";
    }
    return "?";
}

struct AugmentPolicy {
    int n = 2;   // transforms per image
    int m = 14;  // global magnitude in [0, 30]
    std::vector<AugOp> op_set = {AugOp::HFlip,      AugOp::RandomResizedCrop,
                                 AugOp::Brightness, AugOp::Contrast,
                                 AugOp::ChannelDrop, AugOp::Cutout,
                                 AugOp::GaussianNoise};
    uint64_t rng_seed = 0;

    void validate() const {
        if (n < 1) throw ConfigError("augment n must be >= 1");
        if (m < 0 || m > 30) throw ConfigError("augment m must be in [0,30]");
        if (op_set.empty()) throw ConfigError("augment op_set empty");
    }
};

namespace detail {

inline void apply_aug_op(Tensor& img, AugOp op, double mag, Rng& rng) {
    int64_t C = img.dim(0), H = img.dim(1), W = img.dim(2);
    auto px = [&](int64_t c, int64_t i, int64_t j) -> float& { return img.data[(c * H + i) * W + j]; };
    switch (op) {
        case AugOp::Identity:
            break;
        case AugOp::HFlip: {
            for (int64_t c = 0; c < C; ++c)
                for (int64_t i = 0; i < H; ++i)
                    for (int64_t j = 0; j < W / 2; ++j) std::swap(px(c, i, j), px(c, i, W - 1 - j));
            break;
        }
        case AugOp::RandomResizedCrop: {
            double scale = 1.0 - 0.5 * mag * rng.uniform();
            int64_t ch = std::max<int64_t>(1, (int64_t)std::lround(scale * (double)H));
            int64_t cw = std::max<int64_t>(1, (int64_t)std::lround(scale * (double)W));
            int64_t oi = rng.uniform_int(H - ch + 1);
            int64_t oj = rng.uniform_int(W - cw + 1);
            Tensor out({C, H, W});
            for (int64_t c = 0; c < C; ++c)
                for (int64_t i = 0; i < H; ++i)
                    for (int64_t j = 0; j < W; ++j) {
                        int64_t si = oi + std::min<int64_t>(ch - 1, i * ch / H);
                        int64_t sj = oj + std::min<int64_t>(cw - 1, j * cw / W);
                        out.data[(c * H + i) * W + j] = px(c, si, sj);
                    }
            img = std::move(out);
            break;
        }
        case AugOp::Brightness: {
            float f = (float)(1.0 + 0.8 * mag * rng.uniform(-1.0, 1.0));
            for (auto& v : img.data) v *= f;
            break;
        }
        case AugOp::Contrast: {
            double mean = 0.0;
            for (float v : img.data) mean += v;
            mean /= (double)img.numel();
            float w = (float)(0.8 * mag * rng.uniform());
            for (auto& v : img.data) v = (1.0f - w) * v + w * (float)mean;
            break;
        }
        case AugOp::ChannelDrop: {
            int64_t c = rng.uniform_int(C);
            float f = (float)(1.0 - mag * rng.uniform());
            for (int64_t i = 0; i < H; ++i)
                for (int64_t j = 0; j < W; ++j) px(c, i, j) *= f;
            break;
        }
        case AugOp::Cutout: {
            int64_t side = std::max<int64_t>(1, (int64_t)std::lround(0.6 * mag * (double)std::min(H, W)));
            side = std::min(side, std::min(H, W));
            int64_t oi = rng.uniform_int(H - side + 1);
            int64_t oj = rng.uniform_int(W - side + 1);
            for (int64_t c = 0; c < C; ++c)
                for (int64_t i = oi; i < oi + side; ++i)
                    for (int64_t j = oj; j < oj + side; ++j) px(c, i, j) = 0.0f;
            break;
        }
        case AugOp::GaussianNoise: {
            float sigma = (float)(0.3 * mag);
            for (auto& v : img.data) v += sigma * (float)rng.normal();
            break;
        }
    }
}

}  // namespace detail

// Applies n randomly chosen ops at magnitude m/30; output clamped to [0,1].
inline Tensor rand_augment(const Tensor& image, const AugmentPolicy& policy, Rng& rng) {
    policy.validate();
    if (image.rank() != 3) throw DimensionError("rand_augment expects [C,H,W]");
    Tensor out = image;
    double mag = (double)policy.m / 30.0;
    for (int t = 0; t < policy.n; ++t) {
        AugOp op = policy.op_set[(size_t)rng.uniform_int((int64_t)policy.op_set.size())];
        detail::apply_aug_op(out, op, mag, rng);
    }
    for (auto& v : out.data) v = std::clamp(v, 0.0f, 1.0f);
    return out;
}

// Two independent augmented views per sample, index-aligned (positive pairs
// share index). Per-sample streams derive from (policy seed, epoch, sample id,
// branch), so batch order can never change an augmentation.
inline std::pair<Tensor, Tensor> make_views(const Tensor& batch, const AugmentPolicy& policy,
                                            uint64_t epoch, const std::vector<int64_t>& sample_ids) {
    if (batch.rank() != 4 || batch.dim(0) < 1) throw DimensionError("make_views expects [B,C,H,W], B >= 1");
    int64_t B = batch.dim(0), C = batch.dim(1), H = batch.dim(2), W = batch.dim(3);
    if ((int64_t)sample_ids.size() != B) throw DimensionError("sample_ids size != batch");
    Tensor vt({B, C, H, W}), vs({B, C, H, W});
    int64_t per = C * H * W;
    for (int64_t b = 0; b < B; ++b) {
        Tensor img({C, H, W},
                   std::vector<float>(batch.data.begin() + b * per, batch.data.begin() + (b + 1) * per));
        Rng rt = Rng::derive(policy.rng_seed, epoch, (uint64_t)sample_ids[(size_t)b], 1);
        Rng rs = Rng::derive(policy.rng_seed, epoch, (uint64_t)sample_ids[(size_t)b], 2);
        Tensor at = rand_augment(img, policy, rt);
        Tensor as = rand_augment(img, policy, rs);
        std::copy(at.data.begin(), at.data.end(), vt.data.begin() + b * per);
        std::copy(as.data.begin(), as.data.end(), vs.data.begin() + b * per);
    }
    return {std::move(vt), std::move(vs)};
}

inline std::pair<Tensor, Tensor> make_views(const Tensor& batch, const AugmentPolicy& policy,
                                            uint64_t epoch = 0) {
    std::vector<int64_t> ids((size_t)batch.dim(0));
    for (size_t i = 0; i < ids.size(); ++i) ids[i] = (int64_t)i;
    return make_views(batch, policy, epoch, ids);
}

}  // namespace steallab
