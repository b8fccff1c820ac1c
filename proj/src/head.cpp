#include "glr/head.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

namespace glr {

double fixed_adacos_scale(std::size_t num_classes) {
    if (num_classes < 3)
        fail(Errc::bad_argument, "fixed_adacos_scale: need at least 3 classes");
    return std::numbers::sqrt2 * std::log(static_cast<double>(num_classes - 1));
}

std::vector<double> normalize_mean_one(std::span<const double> raw) {
    if (raw.empty()) fail(Errc::empty_input, "normalize_mean_one: empty weights");
    double sum = 0.0;
    for (const double w : raw) {
        if (!(w > 0.0) || !std::isfinite(w))
            fail(Errc::bad_argument, "normalize_mean_one: weights must be positive and finite");
        sum += w;
    }
    const double scale = static_cast<double>(raw.size()) / sum;
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] * scale;
    return out;
}

ClassWeights class_weights(std::span<const std::size_t> class_counts) {
    if (class_counts.empty()) fail(Errc::empty_input, "class_weights: no classes");
    std::vector<double> raw(class_counts.size());
    for (std::size_t c = 0; c < class_counts.size(); ++c) {
        if (class_counts[c] == 0)
            fail(Errc::bad_argument,
                 "class_weights: class " + std::to_string(c) + " has zero count");
        raw[c] = 1.0 / std::log(static_cast<double>(class_counts[c]) + 1.0);
    }
    return ClassWeights{normalize_mean_one(raw)};
}

CosineHead make_head(std::size_t input_dim, std::size_t emb_dim, std::size_t num_classes,
                     std::uint64_t seed) {
    if (input_dim == 0 || emb_dim == 0) fail(Errc::bad_argument, "make_head: zero dimension");
    if (num_classes < 3) fail(Errc::bad_argument, "make_head: fewer than 3 classes");
    CosineHead head;
    head.input_dim = input_dim;
    head.emb_dim = emb_dim;
    head.num_classes = num_classes;
    head.scale = fixed_adacos_scale(num_classes);

    Rng proj_rng(derive_seed(seed, 1));
    const double proj_sigma = 1.0 / std::sqrt(static_cast<double>(input_dim));
    head.proj.resize(input_dim * emb_dim);
    for (float& v : head.proj) v = static_cast<float>(proj_rng.normal() * proj_sigma);

    Rng proto_rng(derive_seed(seed, 2));
    const double proto_sigma = 1.0 / std::sqrt(static_cast<double>(emb_dim));
    head.prototypes.resize(num_classes * emb_dim);
    for (float& v : head.prototypes) v = static_cast<float>(proto_rng.normal() * proto_sigma);
    return head;
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) fail(Errc::empty_input, "softmax: empty logits");
    double maxv = logits[0];
    for (const double t : logits) {
        if (!std::isfinite(t)) fail(Errc::non_finite, "softmax: non-finite logit");
        maxv = std::max(maxv, t);
    }
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - maxv);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
    if (label >= logits.size()) fail(Errc::bad_argument, "cross_entropy: label out of range");
    double maxv = logits[0];
    for (const double t : logits) {
        if (!std::isfinite(t)) fail(Errc::non_finite, "cross_entropy: non-finite logit");
        maxv = std::max(maxv, t);
    }
    double sum = 0.0;
    for (const double t : logits) sum += std::exp(t - maxv);
    return (std::log(sum) + maxv) - logits[label];
}

double weighted_ce_loss(std::span<const double> logits, std::size_t label,
                        const ClassWeights& class_w, double sample_w) {
    if (label >= class_w.weights.size())
        fail(Errc::bad_argument, "weighted_ce_loss: label out of range for class weights");
    if (!(sample_w > 0.0) || !std::isfinite(sample_w))
        fail(Errc::bad_argument, "weighted_ce_loss: sample weight must be positive and finite");
    const double w = sample_w * class_w.weights[label];
    return w * cross_entropy(logits, label);
}

void validate(const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
        fail(Errc::bad_argument, "train config: learning rate must be positive");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
        fail(Errc::bad_argument, "train config: momentum must be in [0, 1)");
    if (!(cfg.weight_decay >= 0.0) || !std::isfinite(cfg.weight_decay))
        fail(Errc::bad_argument, "train config: weight decay must be >= 0");
    if (cfg.batch_size == 0) fail(Errc::bad_argument, "train config: batch size must be >= 1");
}

namespace {

constexpr char kMagic[4] = {'G', 'L', 'R', 'H'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) fail(Errc::io_failure, "glrh: write failed");
}

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
    put_bytes(out, buf, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
    put_bytes(out, buf, 8);
}

void get_bytes(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) fail(Errc::truncated, "glrh: truncated file");
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char buf[4];
    get_bytes(in, buf, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    get_bytes(in, buf, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void put_f32_block(std::ostream& out, const std::vector<float>& values) {
    for (const float f : values) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
    }
}

void get_f32_block(std::istream& in, std::vector<float>& values) {
    for (float& f : values) {
        const std::uint32_t bits = get_u32(in);
        float v;
        std::memcpy(&v, &bits, 4);
        if (!std::isfinite(v)) fail(Errc::non_finite, "glrh: non-finite parameter");
        f = v;
    }
}

}  // namespace

std::size_t save_head(const CosineHead& head, std::ostream& out) {
    detail::check_head(head);
    put_bytes(out, kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(head.input_dim));
    put_u32(out, static_cast<std::uint32_t>(head.emb_dim));
    put_u32(out, static_cast<std::uint32_t>(head.num_classes));
    std::uint64_t scale_bits;
    std::memcpy(&scale_bits, &head.scale, 8);
    put_u64(out, scale_bits);
    put_f32_block(out, head.proj);
    put_f32_block(out, head.prototypes);
    out.flush();
    if (!out) fail(Errc::io_failure, "glrh: write failed");
    return 28 + 4 * (head.proj.size() + head.prototypes.size());
}

CosineHead load_head(std::istream& in) {
    char magic[4];
    get_bytes(in, magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) fail(Errc::bad_magic, "glrh: bad magic bytes");
    const std::uint32_t version = get_u32(in);
    if (version != kVersion)
        fail(Errc::bad_version, "glrh: unsupported version " + std::to_string(version));
    CosineHead head;
    head.input_dim = get_u32(in);
    head.emb_dim = get_u32(in);
    head.num_classes = get_u32(in);
    const std::uint64_t scale_bits = get_u64(in);
    std::memcpy(&head.scale, &scale_bits, 8);
    head.proj.resize(head.input_dim * head.emb_dim);
    head.prototypes.resize(head.num_classes * head.emb_dim);
    get_f32_block(in, head.proj);
    get_f32_block(in, head.prototypes);
    detail::check_head(head);
    return head;
}

std::size_t save_head_file(const CosineHead& head, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_failure, "glrh: cannot open '" + path + "' for writing");
    return save_head(head, out);
}

CosineHead load_head_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_failure, "glrh: cannot open '" + path + "'");
    return load_head(in);
}

}  // namespace glr
