#pragma once

// Stage 2 of the cascade: embeds lightly processed text through a pluggable
// provider and re-ranks the stage-1 candidates by cosine similarity. No ANN
// structure; at cascade scale (m <= 200 from n <= 1000) a flat scan wins.

#include <cstdint>
#include <ios>
#include <string>
#include <unordered_map>
#include <vector>

#include "bahith/corpus.hpp"
#include "bahith/ranked.hpp"

namespace bahith::dense {

using Vec = std::vector<float>;

// dot(a, b) / (|a| |b|), computed in double. Throws std::invalid_argument on
// a dimension mismatch or a zero vector (similarity undefined).
double cosine(const Vec& a, const Vec& b);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::string id() const = 0;
    virtual std::size_t dimension() const = 0;

    // Preferred request size; embed_corpus batches by this unless overridden.
    virtual std::size_t batch_size() const { return 8; }

    // One vector per input text, each of dimension(), all components finite.
    // Throws on failure.
    virtual std::vector<Vec> embed(const std::vector<std::string>& texts) = 0;
};

// FNV-1a 64 content hash used as the vector-cache key; corpus edits
// invalidate only the chunks whose light text changed.
uint64_t content_hash(std::string_view text);

// Vectors keyed by content hash, persisted as a binary file: a header with
// provider id, dimension and count, then (hash, chunk id, vector) records.
// Appending new records only patches the header count, so a partially
// embedded corpus survives provider failures.
class VectorCache {
public:
    VectorCache() = default;
    VectorCache(std::string provider_id, uint32_t dimension)
        : provider_id_(std::move(provider_id)), dimension_(dimension) {}

    static VectorCache load(const std::string& path);  // throws on corruption
    void save(const std::string& path) const;

    const std::string& provider_id() const { return provider_id_; }
    uint32_t dimension() const { return dimension_; }
    std::size_t size() const { return by_hash_.size(); }

    const Vec* find(uint64_t hash) const;
    void put(uint64_t hash, const std::string& chunk_id, Vec vec);

    // Chunk id recorded with each vector (diagnostic only; lookups go by hash).
    const std::unordered_map<uint64_t, std::string>& ids() const { return id_of_; }

private:
    friend class CacheAppender;
    std::string provider_id_;
    uint32_t dimension_ = 0;
    std::unordered_map<uint64_t, Vec> by_hash_;
    std::unordered_map<uint64_t, std::string> id_of_;
};

// Incremental writer: creates or extends the cache file batch by batch.
class CacheAppender {
public:
    // Opens `path` for appending; the file is created with the cache header
    // when missing. Throws when an existing file disagrees on provider or
    // dimension.
    CacheAppender(std::string path, const std::string& provider_id, uint32_t dimension);
    void append(uint64_t hash, const std::string& chunk_id, const Vec& vec);

private:
    std::string path_;
    std::streamoff count_field_at_ = 0;
    uint64_t count_ = 0;
};

struct EmbedOptions {
    std::size_t batch_size = 0;  // 0 = the provider's preferred batch size
    int max_attempts = 3;
    std::string cache_path;  // when set, new vectors are appended per batch
};

using VectorMap = std::unordered_map<std::string, Vec>;

// One vector per chunk, computed over the light text in batches of
// batch_size. Cached vectors are reused by (provider id, content hash); new
// ones are added to `cache` (and appended to opts.cache_path when set).
// Provider failures are retried up to max_attempts, then reported with the
// failing batch; everything embedded so far stays cached.
VectorMap embed_corpus(EmbeddingProvider& provider, const std::vector<corpus::Chunk>& chunks,
                       VectorCache& cache, const EmbedOptions& opts = {});

// Top-m candidates by cosine similarity to the query vector, non-increasing,
// ties by ascending chunk id; output is always a subset of the input. Throws
// std::invalid_argument when a candidate has no vector (names the chunk id).
std::vector<RankedPassage> retrieve_dense(const Vec& query,
                                          const std::vector<RankedPassage>& candidates,
                                          const VectorMap& vectors, std::size_t m);

}  // namespace bahith::dense
