#include "bahith/dense.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace bahith::dense {

double cosine(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i], y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) {
        throw std::invalid_argument("cosine: zero vector has no defined similarity");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

uint64_t content_hash(std::string_view text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Vector cache file
//
//   magic "BVC1" | u32 dimension | u32 provider_id_len | provider_id bytes |
//   u64 count | records: u64 hash | u32 id_len | id bytes | dimension * f32
// ---------------------------------------------------------------------------

namespace {

constexpr char kCacheMagic[4] = {'B', 'V', 'C', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool read_pod(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return static_cast<bool>(in);
}

std::streamoff count_offset(const std::string& provider_id) {
    return 4 + 4 + 4 + static_cast<std::streamoff>(provider_id.size());
}

void write_header(std::ostream& out, const std::string& provider_id, uint32_t dimension,
                  uint64_t count) {
    out.write(kCacheMagic, 4);
    write_pod(out, dimension);
    write_pod(out, static_cast<uint32_t>(provider_id.size()));
    out.write(provider_id.data(), static_cast<std::streamsize>(provider_id.size()));
    write_pod(out, count);
}

void write_record(std::ostream& out, uint64_t hash, const std::string& chunk_id, const Vec& vec) {
    write_pod(out, hash);
    write_pod(out, static_cast<uint32_t>(chunk_id.size()));
    out.write(chunk_id.data(), static_cast<std::streamsize>(chunk_id.size()));
    out.write(reinterpret_cast<const char*>(vec.data()),
              static_cast<std::streamsize>(vec.size() * sizeof(float)));
}

struct CacheHeader {
    std::string provider_id;
    uint32_t dimension = 0;
    uint64_t count = 0;
};

CacheHeader read_header(std::istream& in, const std::string& path) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCacheMagic, 4) != 0) {
        throw std::runtime_error("vector cache: bad magic in " + path);
    }
    CacheHeader h;
    uint32_t id_len = 0;
    if (!read_pod(in, h.dimension) || !read_pod(in, id_len) || id_len > 4096) {
        throw std::runtime_error("vector cache: corrupt header in " + path);
    }
    h.provider_id.resize(id_len);
    in.read(h.provider_id.data(), id_len);
    if (!read_pod(in, h.count)) {
        throw std::runtime_error("vector cache: corrupt header in " + path);
    }
    return h;
}

}  // namespace

VectorCache VectorCache::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open vector cache: " + path);
    const CacheHeader h = read_header(in, path);

    VectorCache cache(h.provider_id, h.dimension);
    cache.by_hash_.reserve(h.count);
    for (uint64_t i = 0; i < h.count; ++i) {
        uint64_t hash = 0;
        uint32_t id_len = 0;
        if (!read_pod(in, hash) || !read_pod(in, id_len) || id_len > 1u << 20) {
            throw std::runtime_error("vector cache: corrupt record in " + path);
        }
        std::string id(id_len, '\0');
        in.read(id.data(), id_len);
        Vec vec(h.dimension);
        in.read(reinterpret_cast<char*>(vec.data()),
                static_cast<std::streamsize>(vec.size() * sizeof(float)));
        if (!in) throw std::runtime_error("vector cache: truncated record in " + path);
        cache.put(hash, id, std::move(vec));
    }
    return cache;
}

void VectorCache::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write vector cache: " + path);
    write_header(out, provider_id_, dimension_, by_hash_.size());
    // Deterministic record order.
    std::vector<uint64_t> hashes;
    hashes.reserve(by_hash_.size());
    for (const auto& [h, _] : by_hash_) hashes.push_back(h);
    std::sort(hashes.begin(), hashes.end());
    for (uint64_t h : hashes) write_record(out, h, id_of_.at(h), by_hash_.at(h));
    if (!out) throw std::runtime_error("write failed for vector cache: " + path);
}

const Vec* VectorCache::find(uint64_t hash) const {
    auto it = by_hash_.find(hash);
    return it == by_hash_.end() ? nullptr : &it->second;
}

void VectorCache::put(uint64_t hash, const std::string& chunk_id, Vec vec) {
    if (dimension_ != 0 && vec.size() != dimension_) {
        throw std::invalid_argument("vector cache: dimension mismatch");
    }
    id_of_[hash] = chunk_id;
    by_hash_[hash] = std::move(vec);
}

CacheAppender::CacheAppender(std::string path, const std::string& provider_id,
                             uint32_t dimension)
    : path_(std::move(path)), count_field_at_(count_offset(provider_id)) {
    if (std::filesystem::exists(path_) && std::filesystem::file_size(path_) > 0) {
        std::ifstream in(path_, std::ios::binary);
        const CacheHeader h = read_header(in, path_);
        if (h.provider_id != provider_id || h.dimension != dimension) {
            throw std::runtime_error("vector cache: " + path_ +
                                     " was written by a different provider/dimension");
        }
        count_ = h.count;
    } else {
        std::ofstream out(path_, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot create vector cache: " + path_);
        write_header(out, provider_id, dimension, 0);
    }
}

void CacheAppender::append(uint64_t hash, const std::string& chunk_id, const Vec& vec) {
    std::fstream out(path_, std::ios::binary | std::ios::in | std::ios::out);
    if (!out) throw std::runtime_error("cannot open vector cache for append: " + path_);
    out.seekp(0, std::ios::end);
    write_record(out, hash, chunk_id, vec);
    // Patch the record count in the header.
    ++count_;
    out.seekp(count_field_at_);
    write_pod(out, count_);
    if (!out) throw std::runtime_error("write failed for vector cache: " + path_);
}

// ---------------------------------------------------------------------------
// Corpus embedding
// ---------------------------------------------------------------------------

VectorMap embed_corpus(EmbeddingProvider& provider, const std::vector<corpus::Chunk>& chunks,
                       VectorCache& cache, const EmbedOptions& opts) {
    const std::size_t batch_size = opts.batch_size != 0 ? opts.batch_size : provider.batch_size();
    if (batch_size == 0) throw std::invalid_argument("embed: batch_size must be >= 1");
    if (cache.provider_id().empty()) {
        cache = VectorCache(provider.id(), static_cast<uint32_t>(provider.dimension()));
    } else if (cache.provider_id() != provider.id() ||
               cache.dimension() != provider.dimension()) {
        throw std::invalid_argument("embed: cache belongs to provider '" + cache.provider_id() +
                                    "', not '" + provider.id() + "'");
    }

    std::unique_ptr<CacheAppender> appender;
    if (!opts.cache_path.empty()) {
        appender = std::make_unique<CacheAppender>(opts.cache_path, provider.id(),
                                                   static_cast<uint32_t>(provider.dimension()));
    }

    struct Pending {
        const corpus::Chunk* chunk;
        uint64_t hash;
    };
    std::vector<Pending> pending;
    std::unordered_set<uint64_t> queued;
    std::vector<uint64_t> hashes;
    hashes.reserve(chunks.size());
    for (const auto& c : chunks) {
        const uint64_t h = content_hash(c.light);
        hashes.push_back(h);
        if (cache.find(h) == nullptr && queued.insert(h).second) {
            pending.push_back({&c, h});
        }
    }

    for (std::size_t start = 0, batch_no = 0; start < pending.size();
         start += batch_size, ++batch_no) {
        const std::size_t end = std::min(pending.size(), start + batch_size);
        std::vector<std::string> texts;
        texts.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) texts.push_back(pending[i].chunk->light);

        std::vector<Vec> vecs;
        std::string last_error;
        for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
            try {
                vecs = provider.embed(texts);
                break;
            } catch (const std::exception& e) {
                last_error = e.what();
            }
        }
        if (vecs.empty() && !texts.empty()) {
            throw std::runtime_error("embed: provider failed for batch " +
                                     std::to_string(batch_no) + " (chunks " +
                                     pending[start].chunk->id + " ...) after " +
                                     std::to_string(opts.max_attempts) +
                                     " attempts: " + last_error);
        }
        if (vecs.size() != texts.size()) {
            throw std::runtime_error("embed: provider returned " + std::to_string(vecs.size()) +
                                     " vectors for " + std::to_string(texts.size()) + " texts");
        }
        for (std::size_t i = start; i < end; ++i) {
            Vec& v = vecs[i - start];
            if (v.size() != provider.dimension()) {
                throw std::runtime_error(
                    "embed: provider returned dimension " + std::to_string(v.size()) +
                    ", expected " + std::to_string(provider.dimension()));
            }
            for (float x : v) {
                if (!std::isfinite(x)) {
                    throw std::runtime_error("embed: non-finite component in batch " +
                                             std::to_string(batch_no) + " (chunk " +
                                             pending[i].chunk->id + ")");
                }
            }
            if (appender) appender->append(pending[i].hash, pending[i].chunk->id, v);
            cache.put(pending[i].hash, pending[i].chunk->id, std::move(v));
        }
    }

    VectorMap out;
    out.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        out.emplace(chunks[i].id, *cache.find(hashes[i]));
    }
    return out;
}

std::vector<RankedPassage> retrieve_dense(const Vec& query,
                                          const std::vector<RankedPassage>& candidates,
                                          const VectorMap& vectors, std::size_t m) {
    if (m == 0) throw std::invalid_argument("dense: m must be >= 1");

    struct Scored {
        const RankedPassage* src;
        double score;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (const auto& cand : candidates) {
        auto it = vectors.find(cand.chunk_id);
        if (it == vectors.end()) {
            throw std::invalid_argument("dense: no vector for candidate chunk '" + cand.chunk_id +
                                        "'");
        }
        scored.push_back({&cand, cosine(query, it->second)});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.src->chunk_id < b.src->chunk_id;
    });
    if (scored.size() > m) scored.resize(m);

    std::vector<RankedPassage> out;
    out.reserve(scored.size());
    for (const auto& s : scored) out.push_back({s.src->chunk_id, s.score, Stage::Dense});
    return out;
}

}  // namespace bahith::dense
