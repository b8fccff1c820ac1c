#pragma once

#include "glr/embedding_set.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace glr {

struct Neighbor {
    std::string index_id;
    double distance;  // Euclidean, not squared
};

/// Ranked top-k result for one query: distances non-decreasing, ties ordered
/// by index_id ascending, no repeated index_id.
struct NeighborList {
    std::string query_id;
    std::vector<Neighbor> neighbors;
};

/// Sum of squared differences, accumulated in double in dimension order.
double squared_euclidean(std::span<const float> a, std::span<const float> b);

/// Exact brute-force top-k under Euclidean distance. Comparison happens on
/// squared distances; reported distances are square roots. Ties break by
/// index_id ascending so output is a total order. One list per query, in
/// query order. threads > 1 partitions queries across workers; the result is
/// identical to the sequential run.
std::vector<NeighborList> top_k_search(const EmbeddingSet& queries, const EmbeddingSet& index,
                                       std::size_t k, unsigned threads = 1);

}  // namespace glr
