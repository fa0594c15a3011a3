#pragma once

// Pipeline orchestration: runs the sparse -> dense -> rerank cascade,
// assembles the prompt (persona, few-shot examples, reference contexts,
// question, options, format constraint), calls a pluggable LLM provider and
// parses the answer letter.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bahith/corpus.hpp"
#include "bahith/dense.hpp"
#include "bahith/ranked.hpp"
#include "bahith/rerank.hpp"
#include "bahith/sparse.hpp"

namespace bahith::rag {

// ---------------------------------------------------------------------------
// Items and configuration
// ---------------------------------------------------------------------------

enum class Difficulty { Beginner, Intermediate, Advanced, Unspecified };

const char* to_string(Difficulty d);
Difficulty difficulty_from_string(std::string_view s);  // throws on unknown label

struct McqItem {
    std::string id;
    std::string question;
    std::vector<std::pair<char, std::string>> options;  // ordered, letters from A..F
    std::optional<char> gold;
    Difficulty difficulty = Difficulty::Unspecified;

    // Throws std::invalid_argument unless there are >= 2 options with unique
    // letters in A..F and gold (when set) is one of them.
    void validate() const;

    std::vector<char> letters() const;
};

struct PipelineConfig {
    std::size_t sparse_n = 1000;  // stage-1 candidates
    std::size_t dense_m = 200;    // stage-2 candidates
    std::size_t rerank_k = 5;     // contexts handed to the LLM
    sparse::Bm25Params bm25;
    corpus::ChunkConfig chunk;
    std::size_t dimension = 768;
    bool query_includes_options = true;
    std::size_t few_shot_count = 2;

    // Throws std::invalid_argument unless k <= m <= n (all >= 1).
    void validate() const;
};

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

struct FewShotExample {
    std::string question;
    std::vector<std::pair<char, std::string>> options;
    char answer = 'A';
    std::string reasoning;  // optional; rendered only when non-empty
};

struct ContextPassage {
    std::size_t rank = 0;  // 1-based
    double score = 0.0;
    std::string chunk_id;
    std::string text;  // ORIGINAL chunk text, not the normalized form
};

// Fixed scaffold strings; the stub LLM locates prompt sections by these.
inline constexpr const char* kDefaultPersona =
    "You are an expert Islamic scholar. Your task is to answer multiple-choice questions.";
inline constexpr const char* kDefaultConstraint =
    "Your response MUST be only the single capital letter of the correct option. Do not "
    "include 'Answer:', explanations, or any other text.";
inline constexpr const char* kContextHeader =
    "First, use the following reference text to determine the answer:";
inline constexpr const char* kNoContextNote =
    "No reference text was retrieved for this question.";
inline constexpr const char* kQuestionHeader = "QUESTION:";
inline constexpr const char* kChoicesHeader = "MULTIPLE CHOICES:";

// Layout template with {{persona}}, {{examples}}, {{contexts}}, {{question}},
// {{options}} and {{constraint}} slots.
class PromptTemplate {
public:
    static PromptTemplate parse(std::string_view text);  // throws when a slot is unknown
    static PromptTemplate load(const std::string& path);
    static const PromptTemplate& defaults();  // shipped scaffold

    // Substitutes the slots and collapses runs of blank lines left by empty
    // slots; byte-identical output for identical inputs.
    std::string render(const std::map<std::string, std::string>& slots) const;

private:
    std::string text_;
};

struct PromptBundle {
    std::string persona;
    std::vector<FewShotExample> examples;
    std::vector<ContextPassage> contexts;  // exactly the reranked top-k, rank order
    std::string question;
    std::vector<std::pair<char, std::string>> options;
    std::string constraint;
};

// Bundles item, contexts and examples; validates option letters.
PromptBundle assemble_prompt(const McqItem& item, const std::vector<ContextPassage>& contexts,
                             const std::vector<FewShotExample>& examples);

std::string render_prompt(const PromptBundle& bundle,
                          const PromptTemplate& tmpl = PromptTemplate::defaults());

// Strict pass: the trimmed response equals one valid letter. Lenient pass:
// exactly one distinct valid letter appears as a standalone token. Multiple
// distinct candidates are ambiguous; nullopt means unparseable ("invalid").
std::optional<char> parse_answer(std::string_view raw, const std::vector<char>& valid_letters);

// ---------------------------------------------------------------------------
// Few-shot selection
// ---------------------------------------------------------------------------

struct FewShotSelection {
    std::vector<FewShotExample> examples;
    std::vector<std::string> item_ids;  // for exclusion from evaluation
};

// Seeded random selection of `count` distinct gold-labeled items; throws when
// the dev set has too few.
FewShotSelection select_few_shot(const std::vector<McqItem>& dev_set, std::size_t count,
                                 uint64_t seed);

// ---------------------------------------------------------------------------
// LLM provider
// ---------------------------------------------------------------------------

struct LlmOptions {
    double temperature = 0.0;
    int max_tokens = 16;
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    virtual std::string id() const = 0;
    // Returns the completion text. Throws on transport failure.
    virtual std::string complete(const std::string& prompt, const LlmOptions& opts) = 0;
};

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

enum class Mode { Baseline, Rag };

const char* to_string(Mode mode);
Mode mode_from_string(std::string_view s);

struct PipelineTrace {
    std::string item_id;
    std::vector<RankedPassage> sparse;
    std::vector<RankedPassage> dense;
    std::vector<RankedPassage> rerank;
    std::string prompt;
    std::string raw_response;
    std::optional<char> predicted;  // nullopt = invalid (unparseable)
};

struct Providers {
    dense::EmbeddingProvider* embedder = nullptr;
    rerank::PairScorer* scorer = nullptr;
    LlmProvider* llm = nullptr;
};

class Pipeline {
public:
    // kb, index and vectors must outlive the pipeline. In baseline mode the
    // retrieval stages are skipped entirely and the prompt carries the
    // no-context note.
    Pipeline(const corpus::Kb& kb, const sparse::Bm25Index& index,
             const dense::VectorMap& vectors, Providers providers,
             const textnorm::Normalizer& norm, PipelineConfig cfg,
             PromptTemplate tmpl = PromptTemplate::defaults());

    // Full run for one item: cascade (in rag mode), prompt, LLM call with
    // bounded retries, parse. An unparseable response after one retry yields
    // predicted = nullopt, never an exception; stage failures propagate with
    // the stage name.
    PipelineTrace answer(const McqItem& item, Mode mode,
                         const std::vector<FewShotExample>& examples = {}) const;

    const PipelineConfig& config() const { return cfg_; }

private:
    const corpus::Kb& kb_;
    const sparse::Bm25Index& index_;
    const dense::VectorMap& vectors_;
    Providers providers_;
    const textnorm::Normalizer& norm_;
    PipelineConfig cfg_;
    PromptTemplate tmpl_;

    std::string compose_query(const McqItem& item) const;
};

}  // namespace bahith::rag
