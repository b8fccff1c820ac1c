#include "glr/head.hpp"

#include "glr/rng.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <vector>

using namespace glr;
using testutil::throws_code;

namespace {

HeadT<double> random_head64(std::size_t d_in, std::size_t d_emb, std::size_t C, Rng& rng) {
    HeadT<double> head;
    head.input_dim = d_in;
    head.emb_dim = d_emb;
    head.num_classes = C;
    head.scale = fixed_adacos_scale(C);
    head.proj.resize(d_in * d_emb);
    head.prototypes.resize(C * d_emb);
    for (double& v : head.proj) v = rng.normal();
    for (double& v : head.prototypes) v = rng.normal();
    return head;
}

std::vector<float> random_features(std::size_t n, Rng& rng) {
    std::vector<float> x(n);
    for (float& v : x) v = static_cast<float>(rng.normal());
    return x;
}

ClassWeights unit_weights(std::size_t C) {
    return ClassWeights{std::vector<double>(C, 1.0)};
}

double loss_of(const HeadT<double>& head, std::span<const float> x, std::size_t label,
               const ClassWeights& cw, double sw) {
    return weighted_ce_loss(forward(head, x).logits, label, cw, sw);
}

// err relative to the larger magnitude, floored at 1 for near-zero entries
double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("fixed adacos scale values") {
    CHECK(fixed_adacos_scale(3) == doctest::Approx(0.980258143468547).epsilon(1e-12));
    CHECK(std::abs(fixed_adacos_scale(81313) - std::numbers::sqrt2 * std::log(81312.0)) == 0.0);
    CHECK(fixed_adacos_scale(81313) == doctest::Approx(15.989).epsilon(1e-4));
    CHECK(fixed_adacos_scale(203094) == doctest::Approx(17.284).epsilon(1e-4));
    CHECK(throws_code(Errc::bad_argument, [] { fixed_adacos_scale(2); }));
}

TEST_CASE("class weights: uniform counts give exactly 1") {
    const std::vector<std::size_t> counts{7, 7, 7, 7};
    const ClassWeights cw = class_weights(counts);
    for (const double w : cw.weights) CHECK(w == 1.0);
}

TEST_CASE("class weights: normalization of the raw 1/ln rule on [2,4,8]") {
    // Counts large enough that the +1 guard is irrelevant; the normalization
    // pipeline itself is what this pins down.
    const std::vector<double> raw{1.0 / std::log(2.0), 1.0 / std::log(4.0), 1.0 / std::log(8.0)};
    const std::vector<double> norm = normalize_mean_one(raw);
    CHECK(norm[0] == doctest::Approx(1.63636).epsilon(1e-5));
    CHECK(norm[1] == doctest::Approx(0.81818).epsilon(1e-5));
    CHECK(norm[2] == doctest::Approx(0.54545).epsilon(1e-5));

    // The guarded rule, against an independently evaluated reference.
    const ClassWeights cw = class_weights(std::vector<std::size_t>{2, 4, 8});
    const double r0 = 1.0 / std::log(3.0), r1 = 1.0 / std::log(5.0), r2 = 1.0 / std::log(9.0);
    const double mean = (r0 + r1 + r2) / 3.0;
    CHECK(cw.weights[0] == doctest::Approx(r0 / mean).epsilon(1e-12));
    CHECK(cw.weights[1] == doctest::Approx(r1 / mean).epsilon(1e-12));
    CHECK(cw.weights[2] == doctest::Approx(r2 / mean).epsilon(1e-12));
}

TEST_CASE("class weights: rare classes weigh more, mean is 1") {
    const ClassWeights cw = class_weights(std::vector<std::size_t>{1, 1000});
    CHECK(cw.weights[0] > cw.weights[1]);

    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::size_t> counts(rng.uniform_int(1, 12));
        for (std::size_t& c : counts) c = rng.uniform_int(1, 5000);
        const ClassWeights w = class_weights(counts);
        double mean = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            CHECK(w.weights[i] > 0.0);
            mean += w.weights[i];
            for (std::size_t j = 0; j < counts.size(); ++j)
                if (counts[i] <= counts[j]) CHECK(w.weights[i] >= w.weights[j]);
        }
        mean /= static_cast<double>(counts.size());
        CHECK(std::abs(mean - 1.0) <= 1e-9);
    }

    CHECK(throws_code(Errc::bad_argument, [] { class_weights(std::vector<std::size_t>{3, 0}); }));
}

TEST_CASE("forward: parallel and orthogonal prototypes hit the cosine extremes") {
    HeadT<double> head;
    head.input_dim = 2;
    head.emb_dim = 2;
    head.num_classes = 3;
    head.scale = 4.0;
    head.proj = {1.0, 0.0, 0.0, 1.0};  // identity
    head.prototypes = {2.0, 0.0,       // parallel to e
                       0.0, -7.0,      // orthogonal
                       -3.0, 0.0};     // antiparallel
    const std::vector<float> x{5.f, 0.f};
    const ForwardResult f = forward<double>(head, x);
    CHECK(f.embedding[0] == 1.0);
    CHECK(f.embedding[1] == 0.0);
    CHECK(f.logits[0] == 4.0);  // cos = 1 exactly, logit = scale
    CHECK(f.logits[1] == 0.0);
    CHECK(f.logits[2] == -4.0);
}

TEST_CASE("forward: logits stay inside [-scale, scale] against a brute-force cosine check") {
    Rng rng(8);
    const HeadT<double> head = random_head64(6, 4, 5, rng);
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<float> x = random_features(6, rng);
        const ForwardResult f = forward(head, x);
        for (std::size_t c = 0; c < 5; ++c) {
            CHECK(std::abs(f.logits[c]) <= head.scale);
            // independent cosine: naive norms and dot on the raw parameters
            std::vector<double> z(4, 0.0);
            for (std::size_t i = 0; i < 6; ++i)
                for (std::size_t j = 0; j < 4; ++j) z[j] += double(x[i]) * head.proj[i * 4 + j];
            double zn = 0.0, pn = 0.0, dot = 0.0;
            for (std::size_t j = 0; j < 4; ++j) {
                zn += z[j] * z[j];
                pn += head.prototypes[c * 4 + j] * head.prototypes[c * 4 + j];
                dot += z[j] * head.prototypes[c * 4 + j];
            }
            const double cosine = dot / (std::sqrt(zn) * std::sqrt(pn));
            CHECK(f.logits[c] == doctest::Approx(head.scale * cosine).epsilon(1e-9));
        }
    }
}

TEST_CASE("forward: zero projected vector and zero prototype row are errors") {
    HeadT<double> head;
    head.input_dim = 2;
    head.emb_dim = 2;
    head.num_classes = 3;
    head.scale = 1.0;
    head.proj = {1.0, 0.0, 0.0, 1.0};
    head.prototypes = {1.0, 0.0, 0.0, 0.0, 0.0, 1.0};  // row 1 is zero

    const std::vector<float> zero{0.f, 0.f};
    CHECK(throws_code(Errc::zero_vector, [&] { forward(head, zero); }));

    const std::vector<float> ok{1.f, 1.f};
    CHECK(throws_code(Errc::zero_vector, [&] { forward(head, ok); }));
}

TEST_CASE("forward: positive input scaling never changes the argmax") {
    Rng rng(12);
    const HeadT<double> head = random_head64(5, 3, 4, rng);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<float> x = random_features(5, rng);
        const ForwardResult base = forward(head, x);
        const auto argmax = [](const std::vector<double>& v) {
            return std::distance(v.begin(), std::max_element(v.begin(), v.end()));
        };
        for (const float c : {2.0f, 0.5f, 3.0f, 128.0f}) {
            std::vector<float> scaled = x;
            for (float& v : scaled) v *= c;
            const ForwardResult f = forward(head, scaled);
            CHECK(argmax(f.logits) == argmax(base.logits));
        }
    }
}

TEST_CASE("softmax sums to 1") {
    Rng rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> logits(rng.uniform_int(1, 9));
        for (double& t : logits) t = 10.0 * (rng.uniform01() - 0.5);
        const std::vector<double> p = softmax(logits);
        double sum = 0.0;
        for (const double v : p) sum += v;
        CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
}

TEST_CASE("weighted CE: uniform two-class logits give ln 2") {
    const std::vector<double> logits{0.0, 0.0};
    CHECK(weighted_ce_loss(logits, 0, unit_weights(2), 1.0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("weighted CE: exactly linear in the sample weight") {
    Rng rng(15);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> logits(5);
        for (double& t : logits) t = 8.0 * (rng.uniform01() - 0.5);
        ClassWeights cw{std::vector<double>(5)};
        for (double& w : cw.weights) w = rng.uniform01() + 0.1;
        const double sw = rng.uniform01() + 0.1;
        const std::size_t label = rng.uniform_int(0, 4);

        const double base = weighted_ce_loss(logits, label, cw, sw);
        const double twice = weighted_ce_loss(logits, label, cw, 2.0 * sw);
        CHECK(std::bit_cast<std::uint64_t>(twice) == std::bit_cast<std::uint64_t>(2.0 * base));

        // linear in the class weight too
        ClassWeights cw2 = cw;
        cw2.weights[label] *= 2.0;
        const double cls_twice = weighted_ce_loss(logits, label, cw2, sw);
        CHECK(std::bit_cast<std::uint64_t>(cls_twice) == std::bit_cast<std::uint64_t>(2.0 * base));
    }
}

TEST_CASE("weighted CE agrees with a naive softmax oracle") {
    Rng rng(16);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> logits(rng.uniform_int(2, 7));
        for (double& t : logits) t = 6.0 * (rng.uniform01() - 0.5);
        const std::size_t label = rng.uniform_int(0, logits.size() - 1);
        ClassWeights cw{std::vector<double>(logits.size(), 1.0)};
        for (double& w : cw.weights) w = rng.uniform01() + 0.5;
        const double sw = rng.uniform01() + 0.5;

        // no log-sum-exp trick
        double denom = 0.0;
        for (const double t : logits) denom += std::exp(t);
        const double naive = sw * cw.weights[label] * -std::log(std::exp(logits[label]) / denom);

        CHECK(std::abs(weighted_ce_loss(logits, label, cw, sw) - naive) <= 1e-10);
    }
}

TEST_CASE("weighted CE rejects non-finite logits") {
    const std::vector<double> logits{0.0, std::nan("")};
    CHECK(throws_code(Errc::non_finite, [&] { weighted_ce_loss(logits, 0, unit_weights(2), 1.0); }));
}

TEST_CASE("backward: zero class or sample weight zeroes every gradient") {
    Rng rng(17);
    const HeadT<double> head = random_head64(4, 3, 4, rng);
    const std::vector<float> x = random_features(4, rng);
    ClassWeights cw = unit_weights(4);
    cw.weights[2] = 0.0;  // contrived: zero weight for the target class
    const BackwardResult r = backward(head, x, 2, cw, 1.0);
    CHECK(r.loss == 0.0);
    for (const double g : r.grads.proj) CHECK(g == 0.0);
    for (const double g : r.grads.prototypes) CHECK(g == 0.0);
}

TEST_CASE("backward: saturated correct prediction has vanishing gradients") {
    HeadT<double> head;
    head.input_dim = 2;
    head.emb_dim = 2;
    head.num_classes = 3;
    head.scale = 60.0;  // deep saturation
    head.proj = {1.0, 0.0, 0.0, 1.0};
    head.prototypes = {1.0, 0.0, -1.0, 0.0, -1.0, 0.01};
    const std::vector<float> x{3.f, 0.f};
    const BackwardResult r = backward(head, x, 0, unit_weights(3), 1.0);
    for (const double g : r.grads.proj) CHECK(std::abs(g) < 1e-6);
    for (const double g : r.grads.prototypes) CHECK(std::abs(g) < 1e-6);
}

TEST_CASE("backward matches central finite differences on random small heads") {
    Rng rng(99);
    int instances = 0;
    double worst = 0.0;
    while (instances < 25) {
        const std::size_t d_in = rng.uniform_int(2, 8);
        const std::size_t d_emb = rng.uniform_int(2, 6);
        const std::size_t C = rng.uniform_int(3, 7);
        HeadT<double> head = random_head64(d_in, d_emb, C, rng);
        const std::vector<float> x = random_features(d_in, rng);
        const std::size_t label = rng.uniform_int(0, C - 1);
        ClassWeights cw{std::vector<double>(C)};
        for (double& w : cw.weights) w = rng.uniform01() + 0.25;
        const double sw = rng.uniform01() + 0.25;

        const BackwardResult analytic = backward(head, x, label, cw, sw);
        const double h = 1e-4;

        const auto fd_check = [&](std::vector<double>& params, const std::vector<double>& grads) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double saved = params[i];
                params[i] = saved + h;
                const double up = loss_of(head, x, label, cw, sw);
                params[i] = saved - h;
                const double down = loss_of(head, x, label, cw, sw);
                params[i] = saved;
                const double fd = (up - down) / (2.0 * h);
                worst = std::max(worst, rel_err(grads[i], fd));
            }
        };
        fd_check(head.proj, analytic.grads.proj);
        fd_check(head.prototypes, analytic.grads.prototypes);
        ++instances;
    }
    CHECK(worst <= 1e-4);
    CHECK(instances >= 20);
}

TEST_CASE("backward gradients double bit-exactly with the sample weight") {
    Rng rng(23);
    const HeadT<double> head = random_head64(5, 4, 5, rng);
    const std::vector<float> x = random_features(5, rng);
    ClassWeights cw{std::vector<double>(5)};
    for (double& w : cw.weights) w = rng.uniform01() + 0.2;

    const BackwardResult one = backward(head, x, 1, cw, 0.7);
    const BackwardResult two = backward(head, x, 1, cw, 1.4);
    CHECK(std::bit_cast<std::uint64_t>(two.loss) == std::bit_cast<std::uint64_t>(2.0 * one.loss));
    for (std::size_t i = 0; i < one.grads.proj.size(); ++i)
        CHECK(std::bit_cast<std::uint64_t>(two.grads.proj[i]) ==
              std::bit_cast<std::uint64_t>(2.0 * one.grads.proj[i]));
    for (std::size_t i = 0; i < one.grads.prototypes.size(); ++i)
        CHECK(std::bit_cast<std::uint64_t>(two.grads.prototypes[i]) ==
              std::bit_cast<std::uint64_t>(2.0 * one.grads.prototypes[i]));
}

TEST_CASE("sgd_step: fixed point and vanilla reduction") {
    Rng rng(31);
    CosineHead head = make_head(3, 2, 3, 5);
    const CosineHead before = head;

    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.momentum = 0.0;
    cfg.weight_decay = 0.0;

    HeadGradients zero;
    zero.proj.assign(head.proj.size(), 0.0);
    zero.prototypes.assign(head.prototypes.size(), 0.0);
    Velocity vel;
    sgd_step(head, zero, vel, cfg);
    CHECK(std::memcmp(head.proj.data(), before.proj.data(), head.proj.size() * 4) == 0);
    CHECK(std::memcmp(head.prototypes.data(), before.prototypes.data(),
                      head.prototypes.size() * 4) == 0);

    // momentum 0, decay 0: plain theta - lr * g
    HeadGradients g = zero;
    for (double& v : g.proj) v = rng.normal();
    for (double& v : g.prototypes) v = rng.normal();
    CosineHead stepped = before;
    Velocity vel2;
    sgd_step(stepped, g, vel2, cfg);
    for (std::size_t i = 0; i < stepped.proj.size(); ++i)
        CHECK(stepped.proj[i] ==
              doctest::Approx(before.proj[i] - 0.1 * g.proj[i]).epsilon(1e-6));
}

TEST_CASE("sgd_step: two constant-gradient momentum steps displace by lr*g*(2+mu)") {
    HeadT<double> head;
    head.input_dim = 1;
    head.emb_dim = 1;
    head.num_classes = 3;
    head.scale = 1.0;
    head.proj = {1.0};
    head.prototypes = {0.5, 0.25, -0.5};

    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.momentum = 0.9;
    cfg.weight_decay = 0.0;

    HeadGradients g;
    g.proj = {0.5};
    g.prototypes = {0.0, 0.0, 0.0};
    Velocity vel;
    sgd_step(head, g, vel, cfg);
    sgd_step(head, g, vel, cfg);
    CHECK(head.proj[0] == doctest::Approx(1.0 - 0.1 * 0.5 * 2.9).epsilon(1e-15));
}

TEST_CASE("sgd_step rejects shape mismatches") {
    CosineHead head = make_head(3, 2, 3, 5);
    HeadGradients wrong;
    wrong.proj.assign(head.proj.size() + 1, 0.0);
    wrong.prototypes.assign(head.prototypes.size(), 0.0);
    Velocity vel;
    TrainConfig cfg;
    CHECK(throws_code(Errc::shape_mismatch, [&] { sgd_step(head, wrong, vel, cfg); }));
}

TEST_CASE("reinit_classifier keeps the projection and re-draws prototypes") {
    CosineHead head = make_head(6, 4, 5, 77);
    const CosineHead moved = reinit_classifier(head, 5, 123);
    CHECK(std::memcmp(moved.proj.data(), head.proj.data(), head.proj.size() * 4) == 0);
    CHECK(moved.scale == head.scale);
    CHECK(std::memcmp(moved.prototypes.data(), head.prototypes.data(),
                      head.prototypes.size() * 4) != 0);

    const CosineHead again = reinit_classifier(head, 5, 123);
    CHECK(std::memcmp(again.prototypes.data(), moved.prototypes.data(),
                      moved.prototypes.size() * 4) == 0);

    const CosineHead grown = reinit_classifier(head, 203094, 9);
    CHECK(grown.num_classes == 203094);
    CHECK(grown.scale == doctest::Approx(17.284).epsilon(1e-4));
    CHECK(grown.prototypes.size() == 203094 * 4);

    CHECK(throws_code(Errc::bad_argument, [&] { reinit_classifier(head, 2, 1); }));
}

TEST_CASE("adacos scale moves with the class count across a transfer") {
    CosineHead head = make_head(4, 3, 81313, 1);
    CHECK(head.scale == doctest::Approx(15.989).epsilon(1e-4));
    const CosineHead moved = reinit_classifier(head, 203094, 2);
    CHECK(moved.scale == doctest::Approx(17.284).epsilon(1e-4));
}

TEST_CASE("glrh checkpoint round-trips bit-exactly") {
    const CosineHead head = make_head(7, 3, 9, 55);
    std::ostringstream out(std::ios::binary);
    const std::size_t bytes = save_head(head, out);
    const std::string blob = out.str();
    CHECK(bytes == blob.size());
    CHECK(bytes == 28 + 4 * (head.proj.size() + head.prototypes.size()));

    std::istringstream in(blob, std::ios::binary);
    const CosineHead back = load_head(in);
    CHECK(back.input_dim == head.input_dim);
    CHECK(back.emb_dim == head.emb_dim);
    CHECK(back.num_classes == head.num_classes);
    CHECK(back.scale == head.scale);
    CHECK(std::memcmp(back.proj.data(), head.proj.data(), head.proj.size() * 4) == 0);
    CHECK(std::memcmp(back.prototypes.data(), head.prototypes.data(),
                      head.prototypes.size() * 4) == 0);

    std::string bad = blob;
    bad[0] = 'Z';
    std::istringstream bad_in(bad, std::ios::binary);
    CHECK(throws_code(Errc::bad_magic, [&] { load_head(bad_in); }));

    std::string cut = blob.substr(0, blob.size() - 2);
    std::istringstream cut_in(cut, std::ios::binary);
    CHECK(throws_code(Errc::truncated, [&] { load_head(cut_in); }));
}
