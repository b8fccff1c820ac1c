#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace glr {

/// Named collection of fixed-dimension float32 vectors. Immutable by
/// convention after construction; row i belongs to ids[i].
struct EmbeddingSet {
    std::vector<std::string> ids;
    std::size_t dim = 0;
    std::vector<float> data;  // ids.size() x dim, row-major
    bool normalized = false;

    std::size_t size() const noexcept { return ids.size(); }
    std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
    std::span<float> row(std::size_t i) { return {data.data() + i * dim, dim}; }
};

/// Throws on any invariant violation: empty or duplicate ids, row-count
/// mismatch, non-finite values, off-unit rows when the normalized flag is set.
void validate(const EmbeddingSet& set);

// GLRE container, version 1, all integers little-endian:
//   bytes 0-3  magic "GLRE"
//   bytes 4-7  version u32 = 1
//   bytes 8-15 record count u64
//   bytes 16-19 dim u32
//   bytes 20-23 flags u32 (bit 0 = normalized)
//   id table: per record, u16 byte length + UTF-8 bytes
//   payload: count x dim float32, row-major

/// Writes the set in GLRE form; returns the byte count. Round-trips with
/// load_embeddings bit-identically.
std::size_t save_embeddings(const EmbeddingSet& set, std::ostream& out);

/// Parses a GLRE stream, rejecting malformed input with a distinct error per
/// failure mode (bad magic, version, duplicate ids, non-finite, truncation).
EmbeddingSet load_embeddings(std::istream& in);

std::size_t save_embeddings_file(const EmbeddingSet& set, const std::string& path);
EmbeddingSet load_embeddings_file(const std::string& path);

/// Unit-norm copy of every row. Zero rows are an error (cosine similarity is
/// undefined on them); the message names the offending id.
EmbeddingSet l2_normalize(const EmbeddingSet& set);

/// Reorders every set to the first set's id order. All sets must hold exactly
/// the same ids; a missing id is an error naming it.
std::vector<EmbeddingSet> align_by_ids(const std::vector<EmbeddingSet>& sets);

}  // namespace glr
