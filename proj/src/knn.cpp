#include "glr/knn.hpp"

#include "glr/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace glr {

double squared_euclidean(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        fail(Errc::dimension_mismatch, "squared_euclidean: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

namespace {

struct Candidate {
    double dist2;
    std::size_t row;
};

// Ranks candidates by (distance, index id); the id tiebreak gives a total
// order so results are reproducible and oracle-comparable.
struct Better {
    const EmbeddingSet& index;
    bool operator()(const Candidate& a, const Candidate& b) const {
        if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
        return index.ids[a.row] < index.ids[b.row];
    }
};

NeighborList search_one(const EmbeddingSet& queries, std::size_t q, const EmbeddingSet& index,
                        std::size_t k) {
    const Better better{index};
    const auto qrow = queries.row(q);
    std::vector<Candidate> heap;  // max-heap on Better: worst candidate on top
    heap.reserve(std::min(k, index.size()));
    for (std::size_t r = 0; r < index.size(); ++r) {
        double acc = 0.0;
        const float* iv = index.data.data() + r * index.dim;
        for (std::size_t d = 0; d < index.dim; ++d) {
            const double diff = static_cast<double>(qrow[d]) - static_cast<double>(iv[d]);
            acc += diff * diff;
        }
        const Candidate c{acc, r};
        if (heap.size() < k) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end(), better);
        } else if (better(c, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), better);
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end(), better);
        }
    }
    std::sort_heap(heap.begin(), heap.end(), better);

    NeighborList out;
    out.query_id = queries.ids[q];
    out.neighbors.reserve(heap.size());
    for (const Candidate& c : heap)
        out.neighbors.push_back({index.ids[c.row], std::sqrt(c.dist2)});
    return out;
}

}  // namespace

std::vector<NeighborList> top_k_search(const EmbeddingSet& queries, const EmbeddingSet& index,
                                       std::size_t k, unsigned threads) {
    if (k == 0) fail(Errc::bad_argument, "top_k_search: k must be >= 1");
    if (queries.dim != index.dim)
        fail(Errc::dimension_mismatch, "top_k_search: query/index dimension mismatch");
    if (index.size() == 0) fail(Errc::empty_input, "top_k_search: empty index");
    // duplicate or non-finite input would corrupt the tie order silently
    validate(queries);
    validate(index);

    std::vector<NeighborList> results(queries.size());
    const std::size_t n = queries.size();
    if (n == 0) return results;

    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(threads == 0 ? 1 : threads, n));
    if (workers == 1) {
        for (std::size_t q = 0; q < n; ++q) results[q] = search_one(queries, q, index, k);
        return results;
    }

    // Queries are independent, so a contiguous partition reproduces the
    // sequential output exactly.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, w] {
            try {
                for (std::size_t q = lo; q < hi; ++q)
                    results[q] = search_one(queries, q, index, k);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

}  // namespace glr
