#pragma once

#include "glr/error.hpp"
#include "glr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace glr {

/// Logit scale chosen analytically from the class count, s = sqrt(2) * ln(C - 1),
/// replacing a hand-tuned softmax temperature. Degenerate below 3 classes.
double fixed_adacos_scale(std::size_t num_classes);

/// Per-class loss weights, normalized so the arithmetic mean is exactly 1.
struct ClassWeights {
    std::vector<double> weights;
};

/// Rescales strictly positive weights to mean 1.
std::vector<double> normalize_mean_one(std::span<const double> raw);

/// Weights proportional to 1 / ln(count + 1); the +1 keeps single-sample
/// classes finite. Mean-1 normalization makes the learning rate's meaning
/// independent of the count distribution.
ClassWeights class_weights(std::span<const std::size_t> class_counts);

/// Cosine-softmax classification head: a bias-free linear projection into the
/// embedding space plus one prototype vector per class. Logits are the fixed
/// scale times the cosine between the normalized embedding and each
/// normalized prototype; no angular margin is applied.
///
/// The parameter scalar is float in production; tests instantiate double for
/// finite-difference work.
template <typename S>
struct HeadT {
    std::size_t input_dim = 0;
    std::size_t emb_dim = 0;
    std::size_t num_classes = 0;
    std::vector<S> proj;        // input_dim x emb_dim, row-major
    std::vector<S> prototypes;  // num_classes x emb_dim, row-major
    double scale = 0.0;
};

using CosineHead = HeadT<float>;

/// Fresh head with Gaussian(0, 1/sqrt(fan_in)) entries and the fixed adacos
/// scale for num_classes. Deterministic in seed.
CosineHead make_head(std::size_t input_dim, std::size_t emb_dim, std::size_t num_classes,
                     std::uint64_t seed);

struct ForwardResult {
    std::vector<double> embedding;  // unit norm
    std::vector<double> logits;     // scale * cos(embedding, prototype_c)
};

std::vector<double> softmax(std::span<const double> logits);

/// -log softmax(logits)[label] with max-subtraction for stability.
double cross_entropy(std::span<const double> logits, std::size_t label);

/// sample_w * class_w[label] * cross_entropy. Exactly linear in both weights.
double weighted_ce_loss(std::span<const double> logits, std::size_t label,
                        const ClassWeights& class_w, double sample_w);

struct HeadGradients {
    std::vector<double> proj;
    std::vector<double> prototypes;
};

struct BackwardResult {
    double loss = 0.0;
    HeadGradients grads;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double momentum = 0.9;
    double weight_decay = 1e-5;
    std::size_t batch_size = 64;
    std::size_t epochs = 1;
    std::uint64_t seed = 1;
};

void validate(const TrainConfig& cfg);

/// Momentum buffers for sgd_step; starts empty and is sized on first use.
struct Velocity {
    std::vector<double> proj;
    std::vector<double> prototypes;
};

// GLRH checkpoint, version 1, little-endian:
//   "GLRH" | version u32 = 1 | d_in u32 | d_emb u32 | C u32 | scale f64 |
//   proj (d_in x d_emb f32) | prototypes (C x d_emb f32)
// No optimizer state is persisted.
std::size_t save_head(const CosineHead& head, std::ostream& out);
CosineHead load_head(std::istream& in);
std::size_t save_head_file(const CosineHead& head, const std::string& path);
CosineHead load_head_file(const std::string& path);

namespace detail {

template <typename S>
void check_head(const HeadT<S>& head) {
    if (head.input_dim == 0 || head.emb_dim == 0) fail(Errc::bad_argument, "head: zero dimension");
    if (head.num_classes < 3) fail(Errc::bad_argument, "head: fewer than 3 classes");
    if (head.proj.size() != head.input_dim * head.emb_dim ||
        head.prototypes.size() != head.num_classes * head.emb_dim)
        fail(Errc::shape_mismatch, "head: parameter shape mismatch");
    if (!(head.scale > 0.0) || !std::isfinite(head.scale))
        fail(Errc::bad_argument, "head: scale must be positive and finite");
}

/// x * proj in double, unnormalized.
template <typename S>
std::vector<double> project_raw(const HeadT<S>& head, std::span<const float> x) {
    if (x.size() != head.input_dim) fail(Errc::dimension_mismatch, "forward: feature dim mismatch");
    std::vector<double> z(head.emb_dim, 0.0);
    for (std::size_t i = 0; i < head.input_dim; ++i) {
        const double xi = static_cast<double>(x[i]);
        const S* w = head.proj.data() + i * head.emb_dim;
        for (std::size_t j = 0; j < head.emb_dim; ++j) z[j] += xi * static_cast<double>(w[j]);
    }
    return z;
}

/// L2-normalizes z in place and returns its original norm; errors on zero.
inline double unit_normalize(std::vector<double>& z) {
    double norm2 = 0.0;
    for (const double v : z) norm2 += v * v;
    if (norm2 == 0.0) fail(Errc::zero_vector, "forward: zero projected vector");
    const double norm = std::sqrt(norm2);
    if (!std::isfinite(norm)) fail(Errc::non_finite, "forward: non-finite projection");
    for (double& v : z) v /= norm;
    return norm;
}

/// x * proj, L2-normalized.
template <typename S>
std::vector<double> project_unit(const HeadT<S>& head, std::span<const float> x) {
    std::vector<double> z = project_raw(head, x);
    unit_normalize(z);
    return z;
}

template <typename S>
double prototype_norm(const HeadT<S>& head, std::size_t c) {
    const S* p = head.prototypes.data() + c * head.emb_dim;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < head.emb_dim; ++j) {
        const double v = static_cast<double>(p[j]);
        norm2 += v * v;
    }
    if (norm2 == 0.0)
        fail(Errc::zero_vector, "forward: zero prototype row " + std::to_string(c));
    return std::sqrt(norm2);
}

}  // namespace detail

/// Embedding plus cosine logits for one sample. Cosines are clamped to
/// [-1, 1] so logits stay inside [-scale, scale] despite rounding.
template <typename S>
ForwardResult forward(const HeadT<S>& head, std::span<const float> x) {
    detail::check_head(head);
    ForwardResult out;
    out.embedding = detail::project_unit(head, x);
    out.logits.resize(head.num_classes);
    for (std::size_t c = 0; c < head.num_classes; ++c) {
        const double pn = detail::prototype_norm(head, c);
        const S* p = head.prototypes.data() + c * head.emb_dim;
        double dot = 0.0;
        for (std::size_t j = 0; j < head.emb_dim; ++j)
            dot += out.embedding[j] * static_cast<double>(p[j]);
        const double cosine = std::clamp(dot / pn, -1.0, 1.0);
        out.logits[c] = head.scale * cosine;
    }
    return out;
}

/// Loss and exact analytic gradients of weighted_ce_loss with respect to the
/// projection and prototype entries, composing the softmax-CE gradient, the
/// normalization Jacobians and the linear projection. Every gradient entry is
/// exactly linear in sample_w and class_w[label].
template <typename S>
BackwardResult backward(const HeadT<S>& head, std::span<const float> x, std::size_t label,
                        const ClassWeights& class_w, double sample_w) {
    detail::check_head(head);
    if (label >= head.num_classes) fail(Errc::bad_argument, "backward: label out of range");
    if (class_w.weights.size() != head.num_classes)
        fail(Errc::shape_mismatch, "backward: class weight count mismatch");

    const std::size_t de = head.emb_dim;
    const std::size_t C = head.num_classes;

    std::vector<double> e = detail::project_raw(head, x);
    const double znorm = detail::unit_normalize(e);

    std::vector<double> pnorm(C), cosine(C), logits(C);
    for (std::size_t c = 0; c < C; ++c) {
        pnorm[c] = detail::prototype_norm(head, c);
        const S* p = head.prototypes.data() + c * de;
        double dot = 0.0;
        for (std::size_t j = 0; j < de; ++j) dot += e[j] * static_cast<double>(p[j]);
        cosine[c] = std::clamp(dot / pnorm[c], -1.0, 1.0);
        logits[c] = head.scale * cosine[c];
    }
    for (const double t : logits)
        if (!std::isfinite(t)) fail(Errc::non_finite, "backward: non-finite logits");

    const std::vector<double> q = softmax(logits);
    const double ce = cross_entropy(logits, label);
    const double w = sample_w * class_w.weights[label];

    BackwardResult out;
    out.loss = w * ce;
    out.grads.proj.assign(head.proj.size(), 0.0);
    out.grads.prototypes.assign(head.prototypes.size(), 0.0);

    // dL/dlogit_c = w * (q_c - [c == label])
    std::vector<double> dlogit(C);
    for (std::size_t c = 0; c < C; ++c) dlogit[c] = w * (q[c] - (c == label ? 1.0 : 0.0));

    // Prototype gradient through its own normalization:
    //   dL/dP_cj = scale * dlogit_c * (e_j - cos_c * phat_cj) / |P_c|
    std::vector<double> grad_e(de, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        const S* p = head.prototypes.data() + c * de;
        const double coef = head.scale * dlogit[c] / pnorm[c];
        double* gp = out.grads.prototypes.data() + c * de;
        for (std::size_t j = 0; j < de; ++j) {
            const double phat = static_cast<double>(p[j]) / pnorm[c];
            gp[j] = coef * (e[j] - cosine[c] * phat);
            grad_e[j] += head.scale * dlogit[c] * phat;
        }
    }

    // Embedding gradient through the projection's normalization, then the
    // outer product with the input.
    double edot = 0.0;
    for (std::size_t j = 0; j < de; ++j) edot += e[j] * grad_e[j];
    std::vector<double> grad_z(de);
    for (std::size_t j = 0; j < de; ++j) grad_z[j] = (grad_e[j] - edot * e[j]) / znorm;

    for (std::size_t i = 0; i < head.input_dim; ++i) {
        const double xi = static_cast<double>(x[i]);
        double* gw = out.grads.proj.data() + i * de;
        for (std::size_t j = 0; j < de; ++j) gw[j] = xi * grad_z[j];
    }
    return out;
}

/// Classic SGD with momentum and L2-in-gradient weight decay:
///   g' = g + wd * theta;  v = mu * v + g';  theta -= lr * v
/// Applied to projection and prototypes alike. An empty velocity is
/// zero-initialized to the parameter shapes.
template <typename S>
void sgd_step(HeadT<S>& head, const HeadGradients& grads, Velocity& velocity,
              const TrainConfig& cfg) {
    validate(cfg);
    const std::size_t np = head.proj.size();
    const std::size_t nc = head.prototypes.size();
    if (grads.proj.size() != np || grads.prototypes.size() != nc)
        fail(Errc::shape_mismatch, "sgd_step: gradient shape mismatch");
    if (velocity.proj.empty() && velocity.prototypes.empty()) {
        velocity.proj.assign(np, 0.0);
        velocity.prototypes.assign(nc, 0.0);
    }
    if (velocity.proj.size() != np || velocity.prototypes.size() != nc)
        fail(Errc::shape_mismatch, "sgd_step: velocity shape mismatch");

    const auto update = [&cfg](std::vector<S>& theta, const std::vector<double>& g,
                               std::vector<double>& v) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double decayed = g[i] + cfg.weight_decay * static_cast<double>(theta[i]);
            v[i] = cfg.momentum * v[i] + decayed;
            theta[i] = static_cast<S>(static_cast<double>(theta[i]) - cfg.learning_rate * v[i]);
        }
    };
    update(head.proj, grads.proj, velocity.proj);
    update(head.prototypes, grads.prototypes, velocity.prototypes);
}

/// Transfer to a new class count: the projection is preserved bit-exactly,
/// prototypes are re-drawn, and the scale is recomputed for the new count.
template <typename S>
HeadT<S> reinit_classifier(const HeadT<S>& head, std::size_t new_num_classes, std::uint64_t seed) {
    detail::check_head(head);
    if (new_num_classes < 3) fail(Errc::bad_argument, "reinit_classifier: fewer than 3 classes");
    HeadT<S> out;
    out.input_dim = head.input_dim;
    out.emb_dim = head.emb_dim;
    out.num_classes = new_num_classes;
    out.proj = head.proj;
    out.scale = fixed_adacos_scale(new_num_classes);
    Rng rng(derive_seed(seed, 2));
    const double sigma = 1.0 / std::sqrt(static_cast<double>(head.emb_dim));
    out.prototypes.resize(new_num_classes * head.emb_dim);
    for (S& v : out.prototypes) v = static_cast<S>(rng.normal() * sigma);
    return out;
}

/// Copy with a different parameter scalar (used for 64-bit test replicas).
template <typename To, typename From>
HeadT<To> convert_head(const HeadT<From>& head) {
    HeadT<To> out;
    out.input_dim = head.input_dim;
    out.emb_dim = head.emb_dim;
    out.num_classes = head.num_classes;
    out.scale = head.scale;
    out.proj.assign(head.proj.begin(), head.proj.end());
    out.prototypes.assign(head.prototypes.begin(), head.prototypes.end());
    return out;
}

}  // namespace glr
