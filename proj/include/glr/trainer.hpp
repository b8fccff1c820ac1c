#pragma once

#include "glr/dataset.hpp"
#include "glr/embedding_set.hpp"
#include "glr/head.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace glr {

struct EpochStats {
    double train_loss = 0.0;  // weighted per-sample mean for the epoch
    double val_loss = 0.0;    // unweighted cross entropy over the full val set
};

struct TrainTrace {
    std::vector<EpochStats> epochs;
};

/// Class weights for the label space [0, num_classes) from observed counts.
/// Classes absent from the data get weight 1; the loss never consumes them,
/// and mean-1 normalization runs over the present classes only.
ClassWeights training_class_weights(std::span<const std::uint32_t> labels,
                                    std::size_t num_classes);

/// Seeded-shuffle mini-batch SGD on the head, fully deterministic in
/// (inputs, cfg.seed). Batch gradients are averaged; a non-finite loss aborts
/// with a diagnostic. Validation runs after each epoch. cfg.epochs may be 0,
/// in which case the head is returned untouched.
TrainTrace train(CosineHead& head, const LabeledEmbeddings& data, const LabeledEmbeddings& val,
                 const TrainConfig& cfg);

/// Unit-norm embeddings for n = ids.size() feature rows, as an EmbeddingSet
/// with the normalized flag set.
EmbeddingSet extract_embeddings(const CosineHead& head, std::span<const float> features,
                                std::vector<std::string> ids);

}  // namespace glr
