#pragma once

#include "glr/dataset.hpp"

#include <cstdint>

namespace glr {

struct SyntheticOptions {
    std::size_t num_classes = 50;
    std::size_t dim = 32;
    std::size_t samples_min = 10;  // per-class count range, inclusive
    std::size_t samples_max = 30;
    double noise_sigma = 0.05;
    double label_noise = 0.0;  // fraction of samples relabeled to a wrong class
    std::uint64_t seed = 1;
};

struct SyntheticData {
    LabeledEmbeddings samples;  // observed labels and clean/noisy tags
    std::vector<std::uint32_t> true_labels;
    std::vector<float> centers;  // num_classes x dim
    std::size_t num_classes = 0;
};

/// Gaussian blobs around class centers drawn uniformly on the unit sphere.
/// Samples are grouped by class in generation order; a label_noise fraction
/// is relabeled to a uniformly random wrong class and tagged noisy. True
/// labels are retained for evaluation. Deterministic in seed.
SyntheticData gen_synthetic(const SyntheticOptions& opt);

}  // namespace glr
