#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace glr {

/// Marks whether a sample's label survived cleaning. Noisy-tagged samples may
/// carry a wrong observed label.
enum class SplitTag : std::uint8_t { clean = 0, noisy = 1 };

/// Training inputs: raw feature rows, observed class labels, per-sample loss
/// weights and the clean/noisy tag used by recipe stages.
struct LabeledEmbeddings {
    std::size_t dim = 0;
    std::vector<float> features;        // n x dim, row-major
    std::vector<std::uint32_t> labels;  // in [0, num_classes)
    std::vector<double> sample_weights;
    std::vector<SplitTag> tags;

    std::size_t size() const noexcept { return labels.size(); }
    std::span<const float> feature_row(std::size_t i) const {
        return {features.data() + i * dim, dim};
    }
};

/// Throws on size mismatches, out-of-range labels or non-positive weights.
void validate(const LabeledEmbeddings& data, std::size_t num_classes);

}  // namespace glr
