#include "glr/synthetic.hpp"

#include "glr/error.hpp"
#include "glr/rng.hpp"

#include <cmath>

namespace glr {

SyntheticData gen_synthetic(const SyntheticOptions& opt) {
    if (opt.num_classes < 3) fail(Errc::bad_argument, "gen_synthetic: need at least 3 classes");
    if (opt.dim == 0) fail(Errc::bad_argument, "gen_synthetic: zero feature dim");
    if (opt.samples_min == 0 || opt.samples_min > opt.samples_max)
        fail(Errc::bad_argument, "gen_synthetic: empty samples-per-class range");
    if (!(opt.label_noise >= 0.0 && opt.label_noise < 1.0))
        fail(Errc::bad_argument, "gen_synthetic: label noise must be in [0, 1)");
    if (!(opt.noise_sigma >= 0.0) || !std::isfinite(opt.noise_sigma))
        fail(Errc::bad_argument, "gen_synthetic: noise sigma must be >= 0");

    Rng rng(derive_seed(opt.seed, 0));
    SyntheticData out;
    out.num_classes = opt.num_classes;

    // Class centers uniform on the unit sphere.
    out.centers.resize(opt.num_classes * opt.dim);
    std::vector<double> buf(opt.dim);
    for (std::size_t c = 0; c < opt.num_classes; ++c) {
        double norm = 0.0;
        do {
            double norm2 = 0.0;
            for (std::size_t d = 0; d < opt.dim; ++d) {
                buf[d] = rng.normal();
                norm2 += buf[d] * buf[d];
            }
            norm = std::sqrt(norm2);
        } while (norm == 0.0);
        for (std::size_t d = 0; d < opt.dim; ++d)
            out.centers[c * opt.dim + d] = static_cast<float>(buf[d] / norm);
    }

    std::vector<std::size_t> counts(opt.num_classes);
    std::size_t total = 0;
    for (std::size_t c = 0; c < opt.num_classes; ++c) {
        counts[c] = static_cast<std::size_t>(rng.uniform_int(opt.samples_min, opt.samples_max));
        total += counts[c];
    }

    out.samples.dim = opt.dim;
    out.samples.features.reserve(total * opt.dim);
    out.samples.labels.reserve(total);
    out.true_labels.reserve(total);
    for (std::size_t c = 0; c < opt.num_classes; ++c) {
        const float* center = out.centers.data() + c * opt.dim;
        for (std::size_t s = 0; s < counts[c]; ++s) {
            for (std::size_t d = 0; d < opt.dim; ++d) {
                const double v =
                    static_cast<double>(center[d]) + opt.noise_sigma * rng.normal();
                out.samples.features.push_back(static_cast<float>(v));
            }
            out.samples.labels.push_back(static_cast<std::uint32_t>(c));
            out.true_labels.push_back(static_cast<std::uint32_t>(c));
        }
    }

    out.samples.sample_weights.assign(total, 1.0);
    out.samples.tags.assign(total, SplitTag::clean);
    if (opt.label_noise > 0.0) {
        for (std::size_t i = 0; i < total; ++i) {
            if (rng.uniform01() >= opt.label_noise) continue;
            // Uniform over the other num_classes - 1 labels.
            const std::uint64_t r = rng.uniform_int(0, opt.num_classes - 2);
            const std::uint32_t wrong =
                static_cast<std::uint32_t>(r >= out.true_labels[i] ? r + 1 : r);
            out.samples.labels[i] = wrong;
            out.samples.tags[i] = SplitTag::noisy;
        }
    }
    return out;
}

}  // namespace glr
