#pragma once

// Knowledge-base construction: fatwa records become single retrieval units,
// book text is chunked paragraph-wise with token overlap, and every chunk
// keeps its original, lightly processed and fully processed forms.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bahith/textnorm.hpp"

namespace bahith::corpus {

// One retrieval unit with its tri-directional text forms.
struct Chunk {
    std::string id;  // "<source_id>:<seq>"
    std::string source_id;
    uint32_t seq = 0;
    std::string original;
    std::string light;              // normalize_light(original)
    std::vector<std::string> full;  // normalize_full(original)
    uint32_t token_count = 0;       // whitespace tokens of `light`

    bool operator==(const Chunk&) const = default;
};

struct FatwaRecord {
    std::string category;
    std::string question;
    std::string answer;
    std::map<std::string, std::string> metadata;
};

struct ChunkConfig {
    uint32_t target_tokens = 200;
    uint32_t overlap_tokens = 20;
    uint32_t min_tokens = 50;
    uint32_t max_tokens = 400;

    // Throws std::invalid_argument unless overlap < min <= target <= max.
    void validate() const;

    bool operator==(const ChunkConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

struct IngestError {
    std::size_t record_index = 0;
    std::string message;
};

struct IngestResult {
    std::vector<Chunk> chunks;
    std::vector<IngestError> errors;
};

// One chunk per record, never split; original text is the question and answer
// separated by one blank line. Records with an empty question or answer are
// reported in `errors` and skipped; ingestion continues. The source id is the
// record's metadata["id"] when present, else "fatwa-<index>".
IngestResult ingest_fatwas(const std::vector<FatwaRecord>& records,
                           const textnorm::Normalizer& norm);

// Greedy paragraph packing toward target_tokens; a paragraph longer than
// max_tokens is split at token boundaries; consecutive chunks of one source
// share exactly overlap_tokens tokens. Token counts are whitespace tokens of
// the lightly processed text.
std::vector<Chunk> chunk_paragraphs(const std::vector<std::string>& paragraphs,
                                    const std::string& source_id, const ChunkConfig& cfg,
                                    const textnorm::Normalizer& norm);

// ---------------------------------------------------------------------------
// Source document parsing
// ---------------------------------------------------------------------------

enum class DocFormat { Plain, Html, DocxXml };

// Raised on malformed input; carries the byte offset of the problem.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t byte_offset);
    std::size_t byte_offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Block-level text units in document order, markup removed, empty blocks
// dropped. Plain text splits on blank lines; html treats block-level tags as
// paragraph breaks and skips script/style; docx-xml reads <w:p>/<w:t> from an
// extracted document main part.
std::vector<std::string> extract_paragraphs(std::string_view doc, DocFormat format);

// Fatwa input: one JSON object per line with fields `category`, `question`,
// `answer`, `metadata` (string map). Throws ParseError naming the line on
// malformed JSON or a wrong field type.
std::vector<FatwaRecord> parse_fatwa_jsonl(std::string_view text);
std::vector<FatwaRecord> load_fatwa_jsonl(const std::string& path);

// ---------------------------------------------------------------------------
// Knowledge base
// ---------------------------------------------------------------------------

class Kb {
public:
    Kb() = default;
    explicit Kb(std::vector<Chunk> chunks, ChunkConfig cfg = {});

    const std::vector<Chunk>& chunks() const { return chunks_; }
    const ChunkConfig& chunk_config() const { return cfg_; }

    // nullptr when the id is unknown.
    const Chunk* find(std::string_view id) const;

    std::size_t size() const { return chunks_.size(); }

private:
    std::vector<Chunk> chunks_;
    ChunkConfig cfg_;
    std::unordered_map<std::string_view, std::size_t> by_id_;

    void rebuild_lookup();
};

// Line-delimited store: a header line with format version and the ChunkConfig
// used, then one record per chunk. load_kb throws on a version mismatch or a
// corrupt record; round-trips field-for-field.
void save_kb(const Kb& kb, const std::string& path);
Kb load_kb(const std::string& path);

std::string kb_to_string(const Kb& kb);
Kb kb_from_string(std::string_view text);

}  // namespace bahith::corpus
