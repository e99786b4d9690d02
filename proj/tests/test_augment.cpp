#include <catch2/catch_amalgamated.hpp>

#include "steallab/augment.hpp"
#include "test_util.hpp"

using namespace steallab;
using testutil::random_tensor;

TEST_CASE("identity policy with m=0 is a no-op") {
    AugmentPolicy p;
    p.n = 2;
    p.m = 0;
    p.op_set = {AugOp::Identity};
    Rng src(1), rng(2);
    Tensor img = random_tensor({3, 8, 8}, src, 0.0, 1.0);
    Tensor out = rand_augment(img, p, rng);
    CHECK(hash_tensor(out) == hash_tensor(img));
}

TEST_CASE("rand_augment is deterministic for a fixed stream") {
    AugmentPolicy p;
    p.m = 14;
    Rng src(3);
    Tensor img = random_tensor({3, 8, 8}, src, 0.0, 1.0);
    Rng r1(77), r2(77);
    CHECK(hash_tensor(rand_augment(img, p, r1)) == hash_tensor(rand_augment(img, p, r2)));
}

TEST_CASE("hflip-only policy mirrors pixels exactly") {
    AugmentPolicy p;
    p.n = 1;
    p.m = 14;
    p.op_set = {AugOp::HFlip};
    Rng src(4), rng(5);
    Tensor img = random_tensor({2, 4, 6}, src, 0.0, 1.0);
    Tensor out = rand_augment(img, p, rng);
    // direct pixel-index oracle
    for (int64_t c = 0; c < 2; ++c)
        for (int64_t i = 0; i < 4; ++i)
            for (int64_t j = 0; j < 6; ++j)
                CHECK(out.data[(c * 4 + i) * 6 + j] == img.data[(c * 4 + i) * 6 + (5 - j)]);
}

TEST_CASE("unknown op identifier is a config error") {
    CHECK_THROWS_AS(parse_aug_op("solarize"), ConfigError);
}

TEST_CASE("augmentation preserves shape and [0,1] range") {
    AugmentPolicy p;
    p.n = 3;
    p.m = 30;
    Rng src(6);
    for (int t = 0; t < 25; ++t) {
        Tensor img = random_tensor({3, 8, 8}, src, 0.0, 1.0);
        Rng rng(100 + t);
        Tensor out = rand_augment(img, p, rng);
        REQUIRE(out.shape == img.shape);
        for (float v : out.data) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
    }
}

TEST_CASE("make_views: shapes, identity policy, and view divergence") {
    Rng src(7);
    Tensor batch = random_tensor({3, 3, 8, 8}, src, 0.0, 1.0);
    AugmentPolicy ident;
    ident.n = 1;
    ident.m = 0;
    ident.op_set = {AugOp::Identity};
    auto [t0, s0] = make_views(batch, ident, 0);
    CHECK(hash_tensor(t0) == hash_tensor(batch));
    CHECK(hash_tensor(s0) == hash_tensor(batch));

    AugmentPolicy p;
    p.m = 14;
    p.rng_seed = 9;
    auto [vt, vs] = make_views(batch, p, 0);
    CHECK(vt.shape == batch.shape);
    CHECK(vs.shape == batch.shape);
    // the t/s branches must differ for at least one sample
    CHECK(hash_tensor(vt) != hash_tensor(vs));
}

TEST_CASE("make_views: permuting the batch permutes views identically") {
    Rng src(8);
    Tensor batch = random_tensor({4, 2, 6, 6}, src, 0.0, 1.0);
    AugmentPolicy p;
    p.m = 20;
    p.rng_seed = 11;
    auto [vt, vs] = make_views(batch, p, 3, {0, 1, 2, 3});
    // reversed batch with matching ids
    int64_t per = 2 * 6 * 6;
    Tensor rev(batch.shape);
    for (int64_t b = 0; b < 4; ++b)
        std::copy(batch.data.begin() + b * per, batch.data.begin() + (b + 1) * per,
                  rev.data.begin() + (3 - b) * per);
    auto [rt, rs] = make_views(rev, p, 3, {3, 2, 1, 0});
    for (int64_t b = 0; b < 4; ++b)
        for (int64_t k = 0; k < per; ++k) {
            REQUIRE(rt.data[(3 - b) * per + k] == vt.data[b * per + k]);
            REQUIRE(rs.data[(3 - b) * per + k] == vs.data[b * per + k]);
        }
}

TEST_CASE("make_views rejects bad input") {
    AugmentPolicy p;
    Rng src(9);
    Tensor img = random_tensor({3, 8, 8}, src, 0.0, 1.0);
    CHECK_THROWS_AS(make_views(img, p, 0), DimensionError);  // not [B,C,H,W]
    AugmentPolicy bad;
    bad.n = 0;
    Tensor batch = random_tensor({1, 3, 8, 8}, src, 0.0, 1.0);
    CHECK_THROWS_AS(make_views(batch, bad, 0), ConfigError);
}
