#pragma once

#include "glr/embedding_set.hpp"

#include <vector>

namespace glr {

struct EnsembleMember {
    EmbeddingSet set;
    double weight = 1.0;
};

/// Ordered member list; all sets must carry identical id sets and every
/// weight must be positive and finite.
struct EnsembleSpec {
    std::vector<EnsembleMember> members;
};

/// Weighted concatenation: members are aligned to the first member's id
/// order, each row L2-normalized, each block scaled by its weight, then
/// concatenated in member order. Output dim is the sum of member dims.
///
/// The output is deliberately not re-normalized, which preserves the
/// additivity  d2_concat(q, x) = sum_i w_i^2 * d2_i(q, x)  over member blocks.
EmbeddingSet concat_weighted(const EnsembleSpec& spec);

}  // namespace glr
