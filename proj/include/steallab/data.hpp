#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "steallab/tensor.hpp"

namespace steallab {

struct Dataset {
    Tensor images;  // [M,C,H,W], values in [0,1]
    std::optional<std::vector<int>> labels;
    int classes = 0;
    std::string split = "train";

    int64_t size() const { return images.dim(0); }

    void validate() const {
        if (images.rank() != 4 || images.dim(0) < 1) throw DataError("dataset needs [M,C,H,W], M >= 1");
        if (labels) {
            if ((int64_t)labels->size() != images.dim(0)) throw DataError("label count != image count");
            for (int y : *labels)
                if (y < 0 || y >= classes) throw DataError("label out of range");
        }
    }

    Tensor image(int64_t i) const {
        int64_t per = images.dim(1) * images.dim(2) * images.dim(3);
        return Tensor({images.dim(1), images.dim(2), images.dim(3)},
                      std::vector<float>(images.data.begin() + i * per,
                                         images.data.begin() + (i + 1) * per));
    }

    Tensor gather(const std::vector<int64_t>& idx) const {
        int64_t per = images.dim(1) * images.dim(2) * images.dim(3);
        Tensor out({(int64_t)idx.size(), images.dim(1), images.dim(2), images.dim(3)});
        for (size_t b = 0; b < idx.size(); ++b)
            std::copy(images.data.begin() + idx[b] * per, images.data.begin() + (idx[b] + 1) * per,
                      out.data.begin() + (int64_t)b * per);
        return out;
    }
};

enum class ShiftKind { None, TemplateSwap, NoiseUp, ClassSuperset };

inline ShiftKind parse_shift(const std::string& s) {
    if (s == "none") return ShiftKind::None;
    if (s == "template-swap") return ShiftKind::TemplateSwap;
    if (s == "noise-up") return ShiftKind::NoiseUp;
    if (s == "class-superset") return ShiftKind::ClassSuperset;
    throw ConfigError("unknown shift '" + s + "'");
}

// Deterministic synthetic image datasets: class templates (positioned blobs
// with per-class stripe frequency) plus i.i.d. gaussian noise. Stands in for
// CIFAR/STL at desk scale.
struct SyntheticSpec {
    int classes = 4;
    int samples_per_class = 100;
    int channels = 3;
    int height = 8;
    int width = 8;
    std::string generator = "blobs";  // "blobs" | "blobs-alt" (template-swap variant)
    double noise_sigma = 0.05;
    uint64_t seed = 0;
};

namespace detail {

// Class template: a gaussian blob at a class-dependent position plus a
// class-frequency stripe pattern. The "alt" generator shifts phases and
// positions so the same class index renders differently (distribution shift).
inline Tensor class_template(const SyntheticSpec& spec, int cls) {
    Tensor img({spec.channels, spec.height, spec.width});
    bool alt = spec.generator == "blobs-alt";
    double phase = alt ? 1.7 : 0.0;
    // blob center on a ring; alt rotates the ring
    double ang = 2.0 * M_PI * (double)cls / (double)std::max(1, spec.classes) + phase;
    double cy = 0.5 * spec.height + 0.3 * spec.height * std::sin(ang);
    double cx = 0.5 * spec.width + 0.3 * spec.width * std::cos(ang);
    double rad = 0.25 * std::min(spec.height, spec.width) * (alt ? 1.4 : 1.0);
    double freq = 1.0 + (double)(cls % 4) + (alt ? 0.5 : 0.0);
    for (int c = 0; c < spec.channels; ++c)
        for (int i = 0; i < spec.height; ++i)
            for (int j = 0; j < spec.width; ++j) {
                double d2 = ((i - cy) * (i - cy) + (j - cx) * (j - cx)) / (rad * rad);
                double blob = std::exp(-d2);
                double stripe =
                    0.5 + 0.5 * std::sin(freq * 2.0 * M_PI * (double)j / (double)spec.width +
                                         (double)c * 2.0 + phase);
                double v = 0.65 * blob + 0.35 * stripe * ((c + cls) % 2 == 0 ? 1.0 : 0.55);
                img.data[(c * spec.height + i) * spec.width + j] = (float)v;
            }
    return img;
}

}  // namespace detail

inline Dataset gen_synthetic(const SyntheticSpec& spec) {
    if (spec.classes < 1 || spec.samples_per_class < 1) throw ConfigError("empty synthetic spec");
    if (spec.noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
    if (spec.generator != "blobs" && spec.generator != "blobs-alt")
        throw ConfigError("unknown generator '" + spec.generator + "'");
    if (spec.height < 4 || spec.width < 4)
        throw ConfigError("image too small for the class templates");
    int64_t M = (int64_t)spec.classes * spec.samples_per_class;
    Dataset ds;
    ds.images = Tensor({M, spec.channels, spec.height, spec.width});
    ds.labels = std::vector<int>((size_t)M);
    ds.classes = spec.classes;
    int64_t per = (int64_t)spec.channels * spec.height * spec.width;
    int64_t idx = 0;
    for (int cls = 0; cls < spec.classes; ++cls) {
        Tensor tpl = detail::class_template(spec, cls);
        for (int s = 0; s < spec.samples_per_class; ++s, ++idx) {
            Rng rng = Rng::derive(spec.seed, (uint64_t)cls, (uint64_t)s, 0);
            for (int64_t k = 0; k < per; ++k) {
                float v = tpl.data[k] + (float)(spec.noise_sigma * rng.normal());
                ds.images.data[idx * per + k] = std::clamp(v, 0.0f, 1.0f);
            }
            (*ds.labels)[(size_t)idx] = cls;
        }
    }
    return ds;
}

// Standard CIFAR binary records: 1 label byte + 3072 pixel bytes (R, G, B
// planes of a 32x32 image). Pixels scale to [0,1].
inline Dataset load_cifar_binary(const std::string& path, int classes = 10) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    constexpr size_t kRecord = 1 + 3072;
    if (bytes.empty()) throw FormatError(path + ": empty file");
    if (bytes.size() % kRecord != 0)
        throw FormatError(path + ": truncated record at byte offset " +
                          std::to_string(bytes.size() - bytes.size() % kRecord));
    int64_t M = (int64_t)(bytes.size() / kRecord);
    Dataset ds;
    ds.images = Tensor({M, 3, 32, 32});
    ds.labels = std::vector<int>((size_t)M);
    ds.classes = classes;
    for (int64_t r = 0; r < M; ++r) {
        const unsigned char* rec = bytes.data() + (size_t)r * kRecord;
        (*ds.labels)[(size_t)r] = rec[0];
        for (int64_t k = 0; k < 3072; ++k)
            ds.images.data[r * 3072 + k] = (float)rec[1 + k] / 255.0f;
    }
    ds.validate();
    return ds;
}

// Uniform subsample without replacement, ceil(fraction * M) samples.
inline Dataset subsample(const Dataset& ds, double fraction, uint64_t seed) {
    if (fraction <= 0.0 || fraction > 1.0) throw ConfigError("fraction must be in (0,1]");
    int64_t M = ds.size();
    int64_t n = (int64_t)std::ceil(fraction * (double)M);
    std::vector<int64_t> idx((size_t)M);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(Rng::mix(seed, 0x73756273ULL));
    for (int64_t i = M - 1; i > 0; --i) std::swap(idx[(size_t)i], idx[(size_t)rng.uniform_int(i + 1)]);
    idx.resize((size_t)n);
    Dataset out;
    out.images = ds.gather(idx);
    out.classes = ds.classes;
    out.split = ds.split;
    if (ds.labels) {
        out.labels = std::vector<int>((size_t)n);
        for (size_t i = 0; i < idx.size(); ++i) (*out.labels)[i] = (*ds.labels)[(size_t)idx[i]];
    }
    return out;
}

// Distribution-shifted surrogate analog of same-classes/different-source data.
inline Dataset shifted_variant(const SyntheticSpec& spec, ShiftKind shift) {
    SyntheticSpec s = spec;
    switch (shift) {
        case ShiftKind::None:
            break;
        case ShiftKind::TemplateSwap:
            s.generator = "blobs-alt";
            s.seed = Rng::mix(spec.seed, 0x73776170ULL);
            break;
        case ShiftKind::NoiseUp:
            s.noise_sigma = spec.noise_sigma * 3.0 + 0.05;
            s.seed = Rng::mix(spec.seed, 0x6e6f6973ULL);
            break;
        case ShiftKind::ClassSuperset:
            s.classes = spec.classes * 2;
            s.seed = Rng::mix(spec.seed, 0x73757065ULL);
            break;
    }
    return gen_synthetic(s);
}

// Deterministic 80/20-style split by fraction.
inline std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double train_fraction,
                                                    uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ConfigError("train_fraction must be in (0,1)");
    int64_t M = ds.size();
    std::vector<int64_t> idx((size_t)M);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(Rng::mix(seed, 0x73706c69ULL));
    for (int64_t i = M - 1; i > 0; --i) std::swap(idx[(size_t)i], idx[(size_t)rng.uniform_int(i + 1)]);
    int64_t ntr = std::max<int64_t>(1, std::min<int64_t>(M - 1, (int64_t)std::llround(train_fraction * (double)M)));
    std::vector<int64_t> tr(idx.begin(), idx.begin() + ntr), te(idx.begin() + ntr, idx.end());
    auto take = [&](const std::vector<int64_t>& sel, const std::string& tag) {
        Dataset out;
        out.images = ds.gather(sel);
        out.classes = ds.classes;
        out.split = tag;
        if (ds.labels) {
            out.labels = std::vector<int>(sel.size());
            for (size_t i = 0; i < sel.size(); ++i) (*out.labels)[i] = (*ds.labels)[(size_t)sel[i]];
        }
        return out;
    };
    return {take(tr, "train"), take(te, "test")};
}

}  // namespace steallab
