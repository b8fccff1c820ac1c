#include "glr/ensemble.hpp"

#include "glr/error.hpp"

#include <cmath>

namespace glr {

EmbeddingSet concat_weighted(const EnsembleSpec& spec) {
    if (spec.members.empty()) fail(Errc::empty_input, "ensemble: no members");
    for (const EnsembleMember& m : spec.members)
        if (!(m.weight > 0.0) || !std::isfinite(m.weight))
            fail(Errc::bad_argument, "ensemble: weights must be positive and finite");

    std::vector<EmbeddingSet> sets;
    sets.reserve(spec.members.size());
    for (const EnsembleMember& m : spec.members) sets.push_back(m.set);
    const std::vector<EmbeddingSet> aligned = align_by_ids(sets);

    std::vector<EmbeddingSet> unit;
    unit.reserve(aligned.size());
    std::size_t total_dim = 0;
    for (const EmbeddingSet& s : aligned) {
        unit.push_back(l2_normalize(s));
        total_dim += s.dim;
    }

    EmbeddingSet out;
    out.ids = aligned.front().ids;
    out.dim = total_dim;
    out.normalized = false;
    out.data.reserve(out.ids.size() * total_dim);
    for (std::size_t r = 0; r < out.ids.size(); ++r) {
        for (std::size_t m = 0; m < unit.size(); ++m) {
            const double w = spec.members[m].weight;
            const auto row = unit[m].row(r);
            for (const float v : row)
                out.data.push_back(static_cast<float>(w * static_cast<double>(v)));
        }
    }
    return out;
}

}  // namespace glr
