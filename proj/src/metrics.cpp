#include "glr/metrics.hpp"

#include "glr/error.hpp"

#include <algorithm>
#include <unordered_set>

namespace glr {

double average_precision_at_k(std::span<const std::string> predicted,
                              const std::set<std::string>& relevant, std::size_t k) {
    if (k == 0) fail(Errc::bad_argument, "average_precision_at_k: k must be >= 1");
    if (relevant.empty())
        fail(Errc::empty_input, "average_precision_at_k: empty relevant set");
    {
        std::unordered_set<std::string_view> seen;
        seen.reserve(predicted.size());
        for (const std::string& id : predicted)
            if (!seen.insert(id).second)
                fail(Errc::duplicate_id, "average_precision_at_k: duplicate prediction '" + id + "'");
    }
    const std::size_t cutoff = std::min(predicted.size(), k);
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t j = 0; j < cutoff; ++j) {
        if (relevant.count(predicted[j])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(j + 1);
        }
    }
    return sum / static_cast<double>(std::min(relevant.size(), k));
}

double mean_ap_at_k(const RankedPredictions& predictions, const GroundTruth& truth,
                    std::size_t k) {
    if (k == 0) fail(Errc::bad_argument, "mean_ap_at_k: k must be >= 1");
    for (const auto& [query, _] : predictions.ranking)
        if (!truth.relevant.count(query))
            fail(Errc::unknown_id, "mean_ap_at_k: prediction for unknown query '" + query + "'");

    double sum = 0.0;
    std::size_t scored = 0;
    for (const auto& [query, relevant] : truth.relevant) {
        if (relevant.empty()) continue;  // queries without relevant items are excluded
        ++scored;
        const auto it = predictions.ranking.find(query);
        if (it == predictions.ranking.end()) continue;  // missing prediction scores 0
        sum += average_precision_at_k(it->second, relevant, k);
    }
    if (scored == 0)
        fail(Errc::empty_input, "mean_ap_at_k: no query has a non-empty relevant set");
    return sum / static_cast<double>(scored);
}

double mean_ap_at_100(const RankedPredictions& predictions, const GroundTruth& truth) {
    return mean_ap_at_k(predictions, truth, 100);
}

}  // namespace glr
