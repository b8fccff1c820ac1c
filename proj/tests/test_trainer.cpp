#include "glr/trainer.hpp"

#include "glr/rng.hpp"
#include "glr/synthetic.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace glr;
using testutil::throws_code;

namespace {

// Small separable blobs for smoke-training.
LabeledEmbeddings easy_data(std::size_t classes, std::size_t per_class, std::uint64_t seed) {
    SyntheticOptions opt;
    opt.num_classes = classes;
    opt.dim = 8;
    opt.samples_min = per_class;
    opt.samples_max = per_class;
    opt.noise_sigma = 0.02;
    opt.label_noise = 0.0;
    opt.seed = seed;
    return gen_synthetic(opt).samples;
}

TrainConfig quick_config(std::size_t epochs, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.momentum = 0.9;
    cfg.weight_decay = 1e-5;
    cfg.batch_size = 16;
    cfg.epochs = epochs;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("training_class_weights: absent classes get weight 1, present ones normalize") {
    const std::vector<std::uint32_t> labels{0, 0, 0, 2, 2, 2, 2, 2, 2};
    const ClassWeights cw = training_class_weights(labels, 4);
    CHECK(cw.weights.size() == 4);
    CHECK(cw.weights[1] == 1.0);
    CHECK(cw.weights[3] == 1.0);
    CHECK(cw.weights[0] > cw.weights[2]);  // rarer class weighs more
    CHECK(std::abs((cw.weights[0] + cw.weights[2]) / 2.0 - 1.0) <= 1e-9);
}

TEST_CASE("train: zero epochs returns the head untouched") {
    const LabeledEmbeddings data = easy_data(3, 6, 1);
    CosineHead head = make_head(8, 4, 3, 2);
    const CosineHead before = head;
    const TrainTrace trace = train(head, data, data, quick_config(0, 3));
    CHECK(trace.epochs.empty());
    CHECK(std::memcmp(head.proj.data(), before.proj.data(), head.proj.size() * 4) == 0);
    CHECK(std::memcmp(head.prototypes.data(), before.prototypes.data(),
                      head.prototypes.size() * 4) == 0);
}

TEST_CASE("train: loss descends on separable data") {
    const LabeledEmbeddings data = easy_data(3, 12, 4);
    CosineHead head = make_head(8, 4, 3, 5);
    const TrainTrace trace = train(head, data, data, quick_config(12, 6));
    REQUIRE(trace.epochs.size() == 12);
    CHECK(trace.epochs.back().train_loss < trace.epochs.front().train_loss);
    CHECK(trace.epochs.back().val_loss < trace.epochs.front().val_loss);
}

TEST_CASE("train: identical seeds give bit-identical parameters") {
    const LabeledEmbeddings data = easy_data(4, 10, 7);
    CosineHead a = make_head(8, 4, 4, 8);
    CosineHead b = a;
    const TrainTrace ta = train(a, data, data, quick_config(5, 9));
    const TrainTrace tb = train(b, data, data, quick_config(5, 9));
    CHECK(std::memcmp(a.proj.data(), b.proj.data(), a.proj.size() * 4) == 0);
    CHECK(std::memcmp(a.prototypes.data(), b.prototypes.data(), a.prototypes.size() * 4) == 0);
    for (std::size_t e = 0; e < ta.epochs.size(); ++e) {
        CHECK(ta.epochs[e].train_loss == tb.epochs[e].train_loss);
        CHECK(ta.epochs[e].val_loss == tb.epochs[e].val_loss);
    }

    // different seed, different shuffle, different parameters
    CosineHead c = make_head(8, 4, 4, 8);
    train(c, data, data, quick_config(5, 10));
    CHECK(std::memcmp(a.proj.data(), c.proj.data(), a.proj.size() * 4) != 0);
}

TEST_CASE("train: validation loss is unweighted cross entropy") {
    LabeledEmbeddings data = easy_data(3, 8, 11);
    // skew every weight; validation must ignore all of it
    for (double& w : data.sample_weights) w = 5.0;
    LabeledEmbeddings val = easy_data(3, 4, 12);

    CosineHead head = make_head(8, 4, 3, 13);
    const TrainTrace trace = train(head, data, val, quick_config(1, 14));
    REQUIRE(trace.epochs.size() == 1);

    double naive = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i) {
        const ForwardResult f = forward(head, val.feature_row(i));
        double denom = 0.0;
        for (const double t : f.logits) denom += std::exp(t);
        naive += -std::log(std::exp(f.logits[val.labels[i]]) / denom);
    }
    naive /= static_cast<double>(val.size());
    CHECK(trace.epochs[0].val_loss == doctest::Approx(naive).epsilon(1e-10));
}

TEST_CASE("train: rejects empty sets and dimension mismatches") {
    const LabeledEmbeddings data = easy_data(3, 6, 15);
    CosineHead head = make_head(8, 4, 3, 16);
    LabeledEmbeddings empty;
    empty.dim = 8;
    CHECK(throws_code(Errc::empty_input, [&] { train(head, empty, data, quick_config(1, 1)); }));
    CHECK(throws_code(Errc::empty_input, [&] { train(head, data, empty, quick_config(1, 1)); }));

    CosineHead wrong = make_head(9, 4, 3, 17);
    CHECK(throws_code(Errc::dimension_mismatch,
                      [&] { train(wrong, data, data, quick_config(1, 1)); }));
}

TEST_CASE("extract_embeddings: empty input, unit norms, duplicate rows identical") {
    const CosineHead head = make_head(8, 4, 3, 20);

    const EmbeddingSet empty = extract_embeddings(head, std::vector<float>{}, {});
    CHECK(empty.size() == 0);
    CHECK(empty.dim == 4);
    CHECK(empty.normalized);

    Rng rng(21);
    std::vector<float> features(3 * 8);
    for (float& v : features) v = static_cast<float>(rng.normal());
    // rows 0 and 2 identical
    std::memcpy(features.data() + 16, features.data(), 8 * 4);

    const EmbeddingSet out = extract_embeddings(head, features, {"a", "b", "a2"});
    CHECK(out.size() == 3);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double norm2 = 0.0;
        for (const float v : out.row(i)) norm2 += static_cast<double>(v) * v;
        CHECK(std::abs(std::sqrt(norm2) - 1.0) <= 1e-5);
    }
    CHECK(std::memcmp(out.row(0).data(), out.row(2).data(), 4 * 4) == 0);
}

TEST_CASE("extract_embeddings names the id of a zero projected row") {
    CosineHead head;
    head.input_dim = 2;
    head.emb_dim = 2;
    head.num_classes = 3;
    head.scale = 1.0;
    head.proj = {1.f, 0.f, 0.f, 1.f};
    head.prototypes = std::vector<float>(6, 0.5f);

    const std::vector<float> features{1.f, 1.f, 0.f, 0.f};
    std::string msg;
    CHECK(throws_code(Errc::zero_vector,
                      [&] { extract_embeddings(head, features, {"good", "bad"}); }, &msg));
    CHECK(msg.find("bad") != std::string::npos);
}
