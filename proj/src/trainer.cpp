#include "glr/trainer.hpp"

#include "glr/error.hpp"
#include "glr/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace glr {

void validate(const LabeledEmbeddings& data, std::size_t num_classes) {
    const std::size_t n = data.labels.size();
    if (data.features.size() != n * data.dim || data.sample_weights.size() != n ||
        data.tags.size() != n)
        fail(Errc::shape_mismatch, "labeled embeddings: field sizes disagree");
    if (n > 0 && data.dim == 0)
        fail(Errc::bad_argument, "labeled embeddings: zero feature dim");
    for (const std::uint32_t label : data.labels)
        if (label >= num_classes)
            fail(Errc::bad_argument,
                 "labeled embeddings: label " + std::to_string(label) + " out of range");
    for (const double w : data.sample_weights)
        if (!(w > 0.0) || !std::isfinite(w))
            fail(Errc::bad_argument, "labeled embeddings: sample weights must be positive");
    for (const float v : data.features)
        if (!std::isfinite(v)) fail(Errc::non_finite, "labeled embeddings: non-finite feature");
}

ClassWeights training_class_weights(std::span<const std::uint32_t> labels,
                                    std::size_t num_classes) {
    std::vector<std::size_t> counts(num_classes, 0);
    for (const std::uint32_t label : labels) {
        if (label >= num_classes)
            fail(Errc::bad_argument, "training_class_weights: label out of range");
        ++counts[label];
    }
    std::vector<std::size_t> present;
    present.reserve(num_classes);
    for (const std::size_t c : counts)
        if (c > 0) present.push_back(c);
    if (present.empty()) fail(Errc::empty_input, "training_class_weights: no samples");

    const ClassWeights compact = class_weights(present);
    ClassWeights out;
    out.weights.assign(num_classes, 1.0);
    std::size_t next = 0;
    for (std::size_t c = 0; c < num_classes; ++c)
        if (counts[c] > 0) out.weights[c] = compact.weights[next++];
    return out;
}

TrainTrace train(CosineHead& head, const LabeledEmbeddings& data, const LabeledEmbeddings& val,
                 const TrainConfig& cfg) {
    validate(cfg);
    detail::check_head(head);
    validate(data, head.num_classes);
    validate(val, head.num_classes);
    if (data.size() == 0) fail(Errc::empty_input, "train: empty training set");
    if (val.size() == 0) fail(Errc::empty_input, "train: empty validation set");
    if (data.dim != head.input_dim || val.dim != head.input_dim)
        fail(Errc::dimension_mismatch, "train: feature dim does not match head input dim");

    const ClassWeights cw = training_class_weights(data.labels, head.num_classes);
    const std::size_t n = data.size();

    Velocity velocity;
    TrainTrace trace;
    trace.epochs.reserve(cfg.epochs);

    std::vector<std::size_t> order(n);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed(cfg.seed, epoch));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const std::size_t batch = stop - start;

            HeadGradients acc;
            acc.proj.assign(head.proj.size(), 0.0);
            acc.prototypes.assign(head.prototypes.size(), 0.0);
            for (std::size_t i = start; i < stop; ++i) {
                const std::size_t s = order[i];
                const BackwardResult r = backward(head, data.feature_row(s), data.labels[s], cw,
                                                  data.sample_weights[s]);
                if (!std::isfinite(r.loss))
                    fail(Errc::non_finite, "train: non-finite loss at epoch " +
                                               std::to_string(epoch + 1) + ", batch " +
                                               std::to_string(batch_index + 1));
                loss_sum += r.loss;
                for (std::size_t g = 0; g < acc.proj.size(); ++g) acc.proj[g] += r.grads.proj[g];
                for (std::size_t g = 0; g < acc.prototypes.size(); ++g)
                    acc.prototypes[g] += r.grads.prototypes[g];
            }
            const double inv = 1.0 / static_cast<double>(batch);
            for (double& g : acc.proj) g *= inv;
            for (double& g : acc.prototypes) g *= inv;
            sgd_step(head, acc, velocity, cfg);
        }

        // Unweighted cross entropy over the full validation set.
        double val_sum = 0.0;
        for (std::size_t s = 0; s < val.size(); ++s) {
            const ForwardResult f = forward(head, val.feature_row(s));
            val_sum += cross_entropy(f.logits, val.labels[s]);
        }
        const double val_loss = val_sum / static_cast<double>(val.size());
        if (!std::isfinite(val_loss))
            fail(Errc::non_finite,
                 "train: non-finite validation loss at epoch " + std::to_string(epoch + 1));
        trace.epochs.push_back({loss_sum / static_cast<double>(n), val_loss});
    }
    return trace;
}

EmbeddingSet extract_embeddings(const CosineHead& head, std::span<const float> features,
                                std::vector<std::string> ids) {
    detail::check_head(head);
    if (features.size() != ids.size() * head.input_dim)
        fail(Errc::shape_mismatch, "extract_embeddings: feature size does not match ids x dim");
    EmbeddingSet out;
    out.dim = head.emb_dim;
    out.normalized = true;
    out.ids = std::move(ids);
    out.data.reserve(out.ids.size() * head.emb_dim);
    for (std::size_t i = 0; i < out.ids.size(); ++i) {
        std::vector<double> emb;
        try {
            emb = detail::project_unit(head,
                                       features.subspan(i * head.input_dim, head.input_dim));
        } catch (const Error& e) {
            if (e.code() == Errc::zero_vector)
                fail(Errc::zero_vector,
                     "extract_embeddings: zero projected vector for id '" + out.ids[i] + "'");
            throw;
        }
        for (const double v : emb) out.data.push_back(static_cast<float>(v));
    }
    return out;
}

}  // namespace glr
