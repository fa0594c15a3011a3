#pragma once

// Okapi BM25 inverted index over fully processed tokens; stage 1 of the
// retrieval cascade.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bahith/corpus.hpp"
#include "bahith/ranked.hpp"

namespace bahith::sparse {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    // Throws std::invalid_argument unless k1 > 0 and 0 <= b <= 1.
    void validate() const;
};

// Smoothed non-negative IDF: ln((N - df + 0.5) / (df + 0.5) + 1).
double bm25_idf(std::size_t doc_count, std::size_t doc_freq);

class Bm25Index {
public:
    // An empty index answers every query with no results; baseline-mode runs
    // use it in place of a real one.
    Bm25Index() = default;

    // Builds the index over the chunks' full token lists. Documents are kept
    // in ascending chunk-id order so ranking ties break deterministically.
    // Throws std::invalid_argument when no chunk carries a token.
    static Bm25Index build(const std::vector<corpus::Chunk>& chunks, Bm25Params params = {});

    // Okapi BM25 score of one document for the given query tokens; duplicate
    // query tokens contribute once per occurrence. Terms absent from the
    // document contribute zero. Throws std::invalid_argument on an unknown
    // chunk id.
    double score(const std::vector<std::string>& query_tokens, const std::string& chunk_id) const;

    // Top-n documents by score, non-increasing, ties by ascending chunk id.
    // Documents scoring zero are never returned, so fewer than n results is
    // normal; an empty query yields an empty result.
    std::vector<RankedPassage> retrieve(const std::vector<std::string>& query_tokens,
                                        std::size_t n) const;

    std::size_t doc_count() const { return doc_ids_.size(); }
    double avg_doc_len() const { return avg_doc_len_; }
    const Bm25Params& params() const { return params_; }
    std::size_t term_count() const { return postings_.size(); }

    // Token count of one document's full representation; throws on unknown id.
    uint32_t doc_len(const std::string& chunk_id) const;

    // Postings of one term as (chunk id, term frequency) pairs, ascending id;
    // empty for unknown terms.
    std::vector<std::pair<std::string, uint32_t>> postings(const std::string& term) const;

    // Line-delimited persistence: a header with format version, k1, b,
    // doc_count and avg_doc_len; postings sorted by term then chunk id so the
    // bytes are reproducible. load throws on version mismatch or corruption.
    void save(const std::string& path) const;
    static Bm25Index load(const std::string& path);

    std::string to_string() const;
    static Bm25Index from_string(std::string_view text);

private:
    struct Posting {
        uint32_t doc = 0;  // ordinal into doc_ids_, ascending
        uint32_t tf = 0;
    };

    Bm25Params params_;
    std::vector<std::string> doc_ids_;  // ascending
    std::vector<uint32_t> doc_lens_;
    double avg_doc_len_ = 0.0;
    std::map<std::string, std::vector<Posting>> postings_;

    std::size_t ordinal_of(const std::string& chunk_id) const;  // throws on unknown id
    double term_doc_score(const std::string& term, uint32_t ordinal) const;
};

}  // namespace bahith::sparse
