#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace glr {

/// query id -> relevant index ids. Empty relevant sets are legal; such
/// queries are excluded from mean scores rather than counted as zero.
struct GroundTruth {
    std::map<std::string, std::set<std::string>> relevant;
};

/// query id -> ranked index ids, best first, no duplicates within a list.
struct RankedPredictions {
    std::map<std::string, std::vector<std::string>> ranking;
};

/// Average precision truncated at rank k with the min(|relevant|, k)
/// denominator:
///   AP = (1 / min(m, k)) * sum_{j<=min(n,k)} P(j) * rel(j)
/// Relevant items beyond rank k contribute nothing. The relevant set must be
/// non-empty and the prediction list duplicate-free.
double average_precision_at_k(std::span<const std::string> predicted,
                              const std::set<std::string>& relevant, std::size_t k);

/// Mean AP over all truth queries with non-empty relevant sets. A truth query
/// absent from predictions scores 0; a prediction for an unknown query id is
/// an error.
double mean_ap_at_k(const RankedPredictions& predictions, const GroundTruth& truth, std::size_t k);

/// The retrieval benchmark metric: mean_ap_at_k with k = 100.
double mean_ap_at_100(const RankedPredictions& predictions, const GroundTruth& truth);

}  // namespace glr
