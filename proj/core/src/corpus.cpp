#include "bahith/corpus.hpp"

#include <algorithm>

#include "bahith/utf8.hpp"

namespace bahith::corpus {

void ChunkConfig::validate() const {
    if (min_tokens == 0 || target_tokens == 0 || max_tokens == 0) {
        throw std::invalid_argument("chunk config: sizes must be positive");
    }
    if (!(overlap_tokens < min_tokens && min_tokens <= target_tokens &&
          target_tokens <= max_tokens)) {
        throw std::invalid_argument(
            "chunk config: need overlap_tokens < min_tokens <= target_tokens <= max_tokens");
    }
}

namespace {

uint32_t count_ws_tokens(std::string_view s) {
    uint32_t n = 0;
    bool in_tok = false;
    for (char ch : s) {
        if (ch == ' ') {
            in_tok = false;
        } else if (!in_tok) {
            in_tok = true;
            ++n;
        }
    }
    return n;
}

Chunk make_chunk(const std::string& source_id, uint32_t seq, std::string original,
                 const textnorm::Normalizer& norm) {
    Chunk c;
    c.source_id = source_id;
    c.seq = seq;
    c.id = source_id + ":" + std::to_string(seq);
    c.light = norm.light(original);
    c.full = norm.full(original);
    c.token_count = count_ws_tokens(c.light);
    c.original = std::move(original);
    return c;
}

std::string_view trim_view(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\n' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\n' || s[e - 1] == '\r'))
        --e;
    return s.substr(b, e - b);
}

// A light token located in its source paragraph.
struct TokRef {
    uint32_t para;
    uint32_t tok;
};

// Builds chunks for one source from light tokens tagged with byte spans. The
// accumulator works on token references; emitted chunk text is cut from the
// original paragraphs at token boundaries so the tri-directional forms stay
// aligned.
class SourceChunker {
public:
    SourceChunker(const std::vector<std::string>& paragraphs, const std::string& source_id,
                  const ChunkConfig& cfg, const textnorm::Normalizer& norm)
        : paragraphs_(paragraphs), source_id_(source_id), cfg_(cfg), norm_(norm) {
        analyses_.reserve(paragraphs.size());
        for (const auto& p : paragraphs) analyses_.push_back(norm.analyze(p));
    }

    std::vector<Chunk> run() {
        for (uint32_t p = 0; p < analyses_.size(); ++p) {
            const auto n_tokens = static_cast<uint32_t>(analyses_[p].tokens.size());
            if (n_tokens == 0) continue;
            if (cur_.size() + n_tokens <= cfg_.max_tokens) {
                append_paragraph(p, 0, n_tokens);
                if (cur_.size() >= cfg_.target_tokens) emit();
                continue;
            }
            if (cur_.size() > seed_len_) {
                emit();
                if (cur_.size() + n_tokens <= cfg_.max_tokens) {
                    append_paragraph(p, 0, n_tokens);
                    if (cur_.size() >= cfg_.target_tokens) emit();
                    continue;
                }
            }
            split_paragraph(p, n_tokens);
        }
        flush_tail();
        return std::move(chunks_);
    }

private:
    void append_paragraph(uint32_t p, uint32_t from, uint32_t to) {
        for (uint32_t t = from; t < to; ++t) cur_.push_back({p, t});
    }

    // An oversized paragraph is cut into target-sized windows; the remainder
    // stays in the accumulator for the following paragraphs.
    void split_paragraph(uint32_t p, uint32_t n_tokens) {
        uint32_t idx = 0;
        while (cur_.size() + (n_tokens - idx) > cfg_.target_tokens) {
            const auto take = static_cast<uint32_t>(cfg_.target_tokens - cur_.size());
            append_paragraph(p, idx, idx + take);
            idx += take;
            emit();
        }
        append_paragraph(p, idx, n_tokens);
        if (cur_.size() >= cfg_.target_tokens) emit();
    }

    void emit() {
        chunks_.push_back(build_chunk());
        // Seed the next chunk with the trailing overlap tokens.
        const std::size_t keep = std::min<std::size_t>(cfg_.overlap_tokens, cur_.size());
        cur_.erase(cur_.begin(), cur_.end() - static_cast<std::ptrdiff_t>(keep));
        seed_len_ = cur_.size();
    }

    void flush_tail() {
        if (cur_.size() <= seed_len_) return;  // only carried tokens left
        if (cur_.size() < cfg_.min_tokens && !chunks_.empty()) {
            // Undersized tail: fold the new tokens into the previous chunk
            // when that stays within max_tokens.
            const std::size_t fresh = cur_.size() - seed_len_;
            Chunk& prev = chunks_.back();
            if (prev.token_count + fresh <= cfg_.max_tokens) {
                std::vector<TokRef> merged = prev_refs_;
                merged.insert(merged.end(), cur_.end() - static_cast<std::ptrdiff_t>(fresh),
                              cur_.end());
                cur_ = std::move(merged);
                prev = build_chunk_at(prev.seq);
                cur_.clear();
                seed_len_ = 0;
                return;
            }
        }
        emit();
    }

    Chunk build_chunk() {
        Chunk c = build_chunk_at(next_seq_++);
        prev_refs_ = cur_;
        return c;
    }

    Chunk build_chunk_at(uint32_t seq) {
        std::string original;
        std::size_t i = 0;
        while (i < cur_.size()) {
            std::size_t j = i;
            while (j + 1 < cur_.size() && cur_[j + 1].para == cur_[i].para &&
                   cur_[j + 1].tok == cur_[j].tok + 1) {
                ++j;
            }
            const auto& analysis = analyses_[cur_[i].para];
            const std::string& para_text = paragraphs_[cur_[i].para];
            std::string_view piece;
            if (cur_[i].tok == 0 && cur_[j].tok + 1 == analysis.tokens.size()) {
                piece = trim_view(para_text);
            } else {
                const auto b = analysis.tokens[cur_[i].tok].begin;
                const auto e = analysis.tokens[cur_[j].tok].end;
                piece = std::string_view(para_text).substr(b, e - b);
            }
            if (!original.empty()) original += "\n\n";
            original.append(piece);
            i = j + 1;
        }
        return make_chunk(source_id_, seq, std::move(original), norm_);
    }

    const std::vector<std::string>& paragraphs_;
    const std::string& source_id_;
    const ChunkConfig& cfg_;
    const textnorm::Normalizer& norm_;
    std::vector<textnorm::LightAnalysis> analyses_;

    std::vector<TokRef> cur_;
    std::vector<TokRef> prev_refs_;
    std::size_t seed_len_ = 0;
    uint32_t next_seq_ = 0;
    std::vector<Chunk> chunks_;
};

bool blank_or_ws(std::string_view s) {
    for (char ch : s) {
        if (ch != ' ' && ch != '\t' && ch != '\n' && ch != '\r') return false;
    }
    return true;
}

}  // namespace

IngestResult ingest_fatwas(const std::vector<FatwaRecord>& records,
                           const textnorm::Normalizer& norm) {
    IngestResult out;
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (blank_or_ws(r.question)) {
            out.errors.push_back({i, "empty question"});
            continue;
        }
        if (blank_or_ws(r.answer)) {
            out.errors.push_back({i, "empty answer"});
            continue;
        }
        std::string source_id;
        if (auto it = r.metadata.find("id"); it != r.metadata.end() && !it->second.empty()) {
            source_id = it->second;
        } else {
            source_id = "fatwa-" + std::to_string(i);
        }
        if (auto [it, inserted] = seen.emplace(source_id, i); !inserted) {
            out.errors.push_back({i, "duplicate source id '" + source_id + "' (also record " +
                                         std::to_string(it->second) + ")"});
            continue;
        }
        out.chunks.push_back(make_chunk(source_id, 0, r.question + "\n\n" + r.answer, norm));
    }
    return out;
}

std::vector<Chunk> chunk_paragraphs(const std::vector<std::string>& paragraphs,
                                    const std::string& source_id, const ChunkConfig& cfg,
                                    const textnorm::Normalizer& norm) {
    cfg.validate();
    if (paragraphs.empty()) return {};
    return SourceChunker(paragraphs, source_id, cfg, norm).run();
}

Kb::Kb(std::vector<Chunk> chunks, ChunkConfig cfg) : chunks_(std::move(chunks)), cfg_(cfg) {
    rebuild_lookup();
}

void Kb::rebuild_lookup() {
    by_id_.clear();
    by_id_.reserve(chunks_.size());
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        auto [it, inserted] = by_id_.emplace(chunks_[i].id, i);
        if (!inserted) {
            throw std::invalid_argument("knowledge base: duplicate chunk id '" + chunks_[i].id +
                                        "'");
        }
    }
}

const Chunk* Kb::find(std::string_view id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &chunks_[it->second];
}

}  // namespace bahith::corpus
