#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "steallab/eval.hpp"
#include "test_util.hpp"

using namespace steallab;
using testutil::random_tensor;

namespace {

EncoderModel tiny_encoder(uint64_t seed = 1) {
    ArchSpec a;
    a.kind = ArchKind::MLP;
    a.in_channels = 3;
    a.in_h = 8;
    a.in_w = 8;
    a.embed_dim = 6;
    return init_model(a, seed);
}

}  // namespace

TEST_CASE("agreement on hand-built prediction vectors") {
    CHECK(agreement({1, 2, 3}, {1, 2, 3}) == 1.0);
    CHECK(agreement({0, 1, 2, 3}, {0, 1, 0, 0}) == 0.5);
    CHECK(agreement({0, 1, 2, 3}, {0, 1, 0, 0}) == agreement({0, 1, 0, 0}, {0, 1, 2, 3}));
    CHECK_THROWS_AS(agreement({1, 2}, {1}), DimensionError);
}

TEST_CASE("accuracy on hand-built vectors") {
    CHECK(accuracy({1, 2, 3}, {1, 2, 3}) == 1.0);
    CHECK(accuracy({0, 0, 0}, {1, 1, 1}) == 0.0);
}

TEST_CASE("agreement(p,p)=1 and n*agreement is integral (property)") {
    Rng rng(12);
    for (int t = 0; t < 30; ++t) {
        size_t n = 1 + (size_t)rng.uniform_int(40);
        std::vector<int> a, b;
        for (size_t i = 0; i < n; ++i) {
            a.push_back((int)rng.uniform_int(5));
            b.push_back((int)rng.uniform_int(5));
        }
        CHECK(agreement(a, a) == 1.0);
        double g = agreement(a, b);
        CHECK(g >= 0.0);
        CHECK(g <= 1.0);
        CHECK(std::abs(g * (double)n - std::round(g * (double)n)) < 1e-9);
    }
}

TEST_CASE("probe trains to high accuracy on linearly separable embeddings") {
    // embeddings via a fixed random encoder over well-separated classes
    SyntheticSpec spec;
    spec.classes = 2;
    spec.samples_per_class = 60;
    spec.noise_sigma = 0.03;
    spec.seed = 13;
    Dataset ds = gen_synthetic(spec);
    EncoderModel enc = tiny_encoder(3);
    ProbeHyper ph;
    ph.epochs = 200;
    ph.batch_size = 16;
    ph.lr = 1e-2;  // tiny dataset -> few steps per epoch, so push harder
    LinearProbe probe = train_probe(enc, ds, ph, 2);
    auto preds = predict_labels(probe_logits(probe, embed_dataset(enc, ds)));
    CHECK(accuracy(preds, *ds.labels) > 0.95);
}

TEST_CASE("probe training never perturbs the encoder (bitwise)") {
    SyntheticSpec spec;
    spec.classes = 2;
    spec.samples_per_class = 20;
    spec.seed = 14;
    Dataset ds = gen_synthetic(spec);
    EncoderModel enc = tiny_encoder(4);
    uint64_t before = hash_params(enc.params);
    ProbeHyper ph;
    ph.epochs = 10;
    train_probe(enc, ds, ph, 2);
    CHECK(hash_params(enc.params) == before);
}

TEST_CASE("probe with 0 epochs stays at initialization") {
    SyntheticSpec spec;
    spec.classes = 2;
    spec.samples_per_class = 10;
    spec.seed = 15;
    Dataset ds = gen_synthetic(spec);
    EncoderModel enc = tiny_encoder(5);
    ProbeHyper ph;
    ph.epochs = 0;
    LinearProbe a = train_probe(enc, ds, ph, 7);
    LinearProbe b = train_probe(enc, ds, ph, 7);
    CHECK(hash_tensor(a.weight) == hash_tensor(b.weight));
}

TEST_CASE("probe rejects out-of-range labels") {
    SyntheticSpec spec;
    spec.classes = 2;
    spec.samples_per_class = 5;
    spec.seed = 16;
    Dataset ds = gen_synthetic(spec);
    (*ds.labels)[0] = 5;
    EncoderModel enc = tiny_encoder(6);
    ProbeHyper ph;
    CHECK_THROWS_AS(train_probe(enc, ds, ph, 1), DataError);
}

TEST_CASE("export_embeddings: shape, determinism, parse-back") {
    SyntheticSpec spec;
    spec.classes = 2;
    spec.samples_per_class = 3;  // 5 rows after subsample below
    spec.seed = 17;
    Dataset ds = subsample(gen_synthetic(spec), 5.0 / 6.0, 1);
    REQUIRE(ds.size() == 5);
    ArchSpec a;
    a.kind = ArchKind::MLP;
    a.in_channels = 3;
    a.in_h = 8;
    a.in_w = 8;
    a.embed_dim = 4;
    EncoderModel enc = init_model(a, 7);
    export_embeddings(enc, ds, "emb1.csv");
    export_embeddings(enc, ds, "emb2.csv");
    auto slurp = [](const std::string& p) {
        std::ifstream f(p);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    std::string c1 = slurp("emb1.csv");
    CHECK(c1 == slurp("emb2.csv"));  // byte-identical
    // 1 header + 5 data rows; 2 + D columns
    std::istringstream in(c1);
    std::string line;
    std::getline(in, line);
    CHECK(line == "sample_id,label,e_1,e_2,e_3,e_4");
    Tensor emb = embed_dataset(enc, ds);
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        CHECK(std::stoi(cell) == rows);
        std::getline(ls, cell, ',');
        CHECK(std::stoi(cell) == (*ds.labels)[(size_t)rows]);
        for (int j = 0; j < 4; ++j) {
            std::getline(ls, cell, ',');
            CHECK((float)std::stod(cell) == emb.data[rows * 4 + j]);  // round-trips exactly
        }
        ++rows;
    }
    CHECK(rows == 5);
    std::remove("emb1.csv");
    std::remove("emb2.csv");
}
