#include "glr/embedding_set.hpp"

#include "glr/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <type_traits>
#include <unordered_map>
#include <unordered_set>

namespace glr {
namespace {

constexpr char kMagic[4] = {'G', 'L', 'R', 'E'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagNormalized = 1u;
constexpr std::size_t kMaxIdBytes = 65535;
constexpr double kUnitNormTol = 1e-5;

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) fail(Errc::io_failure, "glre: write failed");
}

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFFu);
    put_bytes(out, buf, sizeof(T));
}

void get_bytes(std::istream& in, void* p, std::size_t n, const char* what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        fail(Errc::truncated, std::string("glre: truncated ") + what);
}

template <typename T>
T get_le(std::istream& in, const char* what) {
    static_assert(std::is_unsigned_v<T>);
    unsigned char buf[sizeof(T)];
    get_bytes(in, buf, sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
    return value;
}

double row_norm(std::span<const float> row) {
    double acc = 0.0;
    for (const float v : row) acc += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(acc);
}

}  // namespace

void validate(const EmbeddingSet& set) {
    if (set.dim == 0) fail(Errc::bad_format, "embedding set: dim must be positive");
    if (set.data.size() != set.ids.size() * set.dim)
        fail(Errc::shape_mismatch, "embedding set: data size does not match ids x dim");
    std::unordered_set<std::string_view> seen;
    seen.reserve(set.ids.size());
    for (const std::string& id : set.ids) {
        if (id.empty()) fail(Errc::bad_format, "embedding set: empty id");
        if (!seen.insert(id).second)
            fail(Errc::duplicate_id, "embedding set: duplicate id '" + id + "'");
    }
    for (const float v : set.data)
        if (!std::isfinite(v)) fail(Errc::non_finite, "embedding set: non-finite value");
    if (set.normalized) {
        for (std::size_t i = 0; i < set.size(); ++i) {
            const double norm = row_norm(set.row(i));
            if (std::abs(norm - 1.0) > kUnitNormTol)
                fail(Errc::bad_format,
                     "embedding set: normalized flag set but row '" + set.ids[i] +
                         "' has norm " + std::to_string(norm));
        }
    }
}

std::size_t save_embeddings(const EmbeddingSet& set, std::ostream& out) {
    validate(set);
    std::size_t bytes = 0;
    put_bytes(out, kMagic, 4);
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint64_t>(out, set.size());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.dim));
    put_le<std::uint32_t>(out, set.normalized ? kFlagNormalized : 0u);
    bytes += 24;
    for (const std::string& id : set.ids) {
        if (id.size() > kMaxIdBytes)
            fail(Errc::id_too_long, "glre: id longer than 65535 bytes: '" + id.substr(0, 32) + "...'");
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
        put_bytes(out, id.data(), id.size());
        bytes += 2 + id.size();
    }
    for (const float v : set.data) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_le<std::uint32_t>(out, bits);
        bytes += 4;
    }
    out.flush();
    if (!out) fail(Errc::io_failure, "glre: write failed");
    return bytes;
}

EmbeddingSet load_embeddings(std::istream& in) {
    char magic[4];
    get_bytes(in, magic, 4, "header");
    if (std::memcmp(magic, kMagic, 4) != 0) fail(Errc::bad_magic, "glre: bad magic bytes");
    const auto version = get_le<std::uint32_t>(in, "header");
    if (version != kVersion)
        fail(Errc::bad_version, "glre: unsupported version " + std::to_string(version));
    const auto count = get_le<std::uint64_t>(in, "header");
    const auto dim = get_le<std::uint32_t>(in, "header");
    const auto flags = get_le<std::uint32_t>(in, "header");

    if (count > std::numeric_limits<std::size_t>::max() / (dim == 0 ? 1 : dim) / 4)
        fail(Errc::bad_format, "glre: record count overflows");

    EmbeddingSet set;
    set.dim = dim;
    set.normalized = (flags & kFlagNormalized) != 0;
    // cap the reserve so a corrupt count fails as truncation, not bad_alloc
    set.ids.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
    std::unordered_set<std::string_view> seen;
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto len = get_le<std::uint16_t>(in, "id table");
        std::string id(len, '\0');
        if (len > 0) get_bytes(in, id.data(), len, "id table");
        if (id.empty()) fail(Errc::bad_format, "glre: empty id");
        set.ids.push_back(std::move(id));
    }
    for (const std::string& id : set.ids)
        if (!seen.insert(id).second) fail(Errc::duplicate_id, "glre: duplicate id '" + id + "'");

    set.data.resize(static_cast<std::size_t>(count) * dim);
    for (float& v : set.data) {
        const auto bits = get_le<std::uint32_t>(in, "payload");
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f)) fail(Errc::non_finite, "glre: non-finite value in payload");
        v = f;
    }
    validate(set);
    return set;
}

std::size_t save_embeddings_file(const EmbeddingSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_failure, "glre: cannot open '" + path + "' for writing");
    return save_embeddings(set, out);
}

EmbeddingSet load_embeddings_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_failure, "glre: cannot open '" + path + "'");
    return load_embeddings(in);
}

EmbeddingSet l2_normalize(const EmbeddingSet& set) {
    validate(set);
    EmbeddingSet out;
    out.ids = set.ids;
    out.dim = set.dim;
    out.normalized = true;
    out.data.resize(set.data.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto row = set.row(i);
        const double norm = row_norm(row);
        if (norm == 0.0)
            fail(Errc::zero_vector, "l2_normalize: zero row for id '" + set.ids[i] + "'");
        float* dst = out.data.data() + i * set.dim;
        for (std::size_t j = 0; j < set.dim; ++j)
            dst[j] = static_cast<float>(static_cast<double>(row[j]) / norm);
    }
    return out;
}

std::vector<EmbeddingSet> align_by_ids(const std::vector<EmbeddingSet>& sets) {
    if (sets.empty()) return {};
    for (const EmbeddingSet& s : sets) validate(s);
    const EmbeddingSet& first = sets.front();

    std::vector<EmbeddingSet> out;
    out.reserve(sets.size());
    out.push_back(first);
    for (std::size_t s = 1; s < sets.size(); ++s) {
        const EmbeddingSet& cur = sets[s];
        std::unordered_map<std::string_view, std::size_t> rows;
        rows.reserve(cur.size());
        for (std::size_t i = 0; i < cur.size(); ++i) rows.emplace(cur.ids[i], i);
        if (cur.size() != first.size()) {
            // Name one id from the larger set that the smaller one lacks.
            for (const std::string& id : first.ids)
                if (!rows.count(id))
                    fail(Errc::missing_id, "align_by_ids: id '" + id + "' missing from set " +
                                               std::to_string(s));
            for (std::size_t i = 0; i < cur.size(); ++i) {
                bool found = false;
                for (const std::string& id : first.ids)
                    if (id == cur.ids[i]) { found = true; break; }
                if (!found)
                    fail(Errc::missing_id,
                         "align_by_ids: id '" + cur.ids[i] + "' missing from set 0");
            }
        }
        EmbeddingSet aligned;
        aligned.dim = cur.dim;
        aligned.normalized = cur.normalized;
        aligned.ids = first.ids;
        aligned.data.resize(cur.data.size());
        for (std::size_t i = 0; i < first.size(); ++i) {
            const auto it = rows.find(first.ids[i]);
            if (it == rows.end())
                fail(Errc::missing_id, "align_by_ids: id '" + first.ids[i] +
                                           "' missing from set " + std::to_string(s));
            const auto src = cur.row(it->second);
            std::copy(src.begin(), src.end(), aligned.data.begin() + i * cur.dim);
        }
        out.push_back(std::move(aligned));
    }
    return out;
}

}  // namespace glr
