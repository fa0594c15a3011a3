#include "bahith/ragflow.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "default_resources.hpp"

namespace bahith::rag {

// ---------------------------------------------------------------------------
// Items and configuration
// ---------------------------------------------------------------------------

const char* to_string(Difficulty d) {
    switch (d) {
        case Difficulty::Beginner:
            return "beginner";
        case Difficulty::Intermediate:
            return "intermediate";
        case Difficulty::Advanced:
            return "advanced";
        case Difficulty::Unspecified:
            return "unspecified";
    }
    return "?";
}

Difficulty difficulty_from_string(std::string_view s) {
    if (s == "beginner") return Difficulty::Beginner;
    if (s == "intermediate") return Difficulty::Intermediate;
    if (s == "advanced") return Difficulty::Advanced;
    if (s == "unspecified" || s.empty()) return Difficulty::Unspecified;
    throw std::invalid_argument("unknown difficulty level '" + std::string(s) + "'");
}

void McqItem::validate() const {
    if (options.size() < 2) {
        throw std::invalid_argument("item '" + id + "': needs at least two options");
    }
    std::vector<char> seen;
    for (const auto& [letter, _] : options) {
        if (letter < 'A' || letter > 'F') {
            throw std::invalid_argument("item '" + id + "': option letter '" +
                                        std::string(1, letter) + "' outside A..F");
        }
        if (std::find(seen.begin(), seen.end(), letter) != seen.end()) {
            throw std::invalid_argument("item '" + id + "': duplicate option letter '" +
                                        std::string(1, letter) + "'");
        }
        seen.push_back(letter);
    }
    if (gold && std::find(seen.begin(), seen.end(), *gold) == seen.end()) {
        throw std::invalid_argument("item '" + id + "': gold letter '" + std::string(1, *gold) +
                                    "' is not an option");
    }
}

std::vector<char> McqItem::letters() const {
    std::vector<char> out;
    out.reserve(options.size());
    for (const auto& [letter, _] : options) out.push_back(letter);
    return out;
}

void PipelineConfig::validate() const {
    if (rerank_k == 0 || dense_m == 0 || sparse_n == 0) {
        throw std::invalid_argument("pipeline config: n, m, k must be >= 1");
    }
    if (!(rerank_k <= dense_m && dense_m <= sparse_n)) {
        throw std::invalid_argument("pipeline config: need k <= m <= n");
    }
    if (dimension == 0) throw std::invalid_argument("pipeline config: dimension must be >= 1");
    bm25.validate();
    chunk.validate();
}

// ---------------------------------------------------------------------------
// Prompt template
// ---------------------------------------------------------------------------

namespace {

const char* const kKnownSlots[] = {"persona", "examples", "contexts",
                                   "question", "options",  "constraint"};

std::string collapse_blank_runs(const std::string& s) {
    // At most one blank line in a row; no leading/trailing blank lines.
    std::string out;
    out.reserve(s.size());
    int pending_newlines = 0;
    for (char c : s) {
        if (c == '\n') {
            ++pending_newlines;
            continue;
        }
        if (!out.empty()) {
            out.append(static_cast<std::size_t>(std::min(pending_newlines, 2)), '\n');
        }
        pending_newlines = 0;
        out.push_back(c);
    }
    if (!out.empty() && pending_newlines > 0) out.push_back('\n');
    return out;
}

std::string fmt_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view text) {
    // Validate slot names up front so typos fail at load, not at render.
    std::size_t pos = 0;
    while ((pos = text.find("{{", pos)) != std::string_view::npos) {
        std::size_t end = text.find("}}", pos + 2);
        if (end == std::string_view::npos) {
            throw std::runtime_error("prompt template: unterminated '{{' placeholder");
        }
        std::string_view name = text.substr(pos + 2, end - pos - 2);
        if (std::none_of(std::begin(kKnownSlots), std::end(kKnownSlots),
                         [&](const char* s) { return name == s; })) {
            throw std::runtime_error("prompt template: unknown slot '{{" + std::string(name) +
                                     "}}'");
        }
        pos = end + 2;
    }
    PromptTemplate t;
    t.text_ = std::string(text);
    return t;
}

PromptTemplate PromptTemplate::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open prompt template: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const PromptTemplate& PromptTemplate::defaults() {
    static const PromptTemplate t = parse(detail::kDefaultPromptTemplateText);
    return t;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& slots) const {
    std::string out;
    out.reserve(text_.size() * 2);
    std::size_t pos = 0;
    while (pos < text_.size()) {
        std::size_t open = text_.find("{{", pos);
        if (open == std::string::npos) {
            out.append(text_, pos, std::string::npos);
            break;
        }
        out.append(text_, pos, open - pos);
        std::size_t close = text_.find("}}", open + 2);
        const std::string name = text_.substr(open + 2, close - open - 2);
        if (auto it = slots.find(name); it != slots.end()) out += it->second;
        pos = close + 2;
    }
    return collapse_blank_runs(out);
}

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

namespace {

std::string render_options(const std::vector<std::pair<char, std::string>>& options) {
    std::string out;
    for (const auto& [letter, text] : options) {
        out.push_back(letter);
        out += ") ";
        out += text;
        out.push_back('\n');
    }
    if (!out.empty()) out.pop_back();
    return out;
}

std::string render_examples(const std::vector<FewShotExample>& examples) {
    std::string out;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& ex = examples[i];
        if (i > 0) out += "\n\n";
        out += "Example:\n";
        out += kQuestionHeader;
        out.push_back('\n');
        out += ex.question;
        out.push_back('\n');
        out += kChoicesHeader;
        out.push_back('\n');
        out += render_options(ex.options);
        out.push_back('\n');
        if (!ex.reasoning.empty()) {
            out += "REASONING: " + ex.reasoning + "\n";
        }
        out += "ANSWER: ";
        out.push_back(ex.answer);
    }
    return out;
}

std::string render_contexts(const std::vector<ContextPassage>& contexts) {
    if (contexts.empty()) return kNoContextNote;
    std::string out = kContextHeader;
    for (const auto& ctx : contexts) {
        out.push_back('\n');
        out += "[" + std::to_string(ctx.rank) + "] (score: " + fmt_score(ctx.score) + ") ";
        out += ctx.text;
    }
    return out;
}

}  // namespace

PromptBundle assemble_prompt(const McqItem& item, const std::vector<ContextPassage>& contexts,
                             const std::vector<FewShotExample>& examples) {
    item.validate();
    PromptBundle bundle;
    bundle.persona = kDefaultPersona;
    bundle.examples = examples;
    bundle.contexts = contexts;
    bundle.question = item.question;
    bundle.options = item.options;
    bundle.constraint = kDefaultConstraint;
    return bundle;
}

std::string render_prompt(const PromptBundle& bundle, const PromptTemplate& tmpl) {
    std::map<std::string, std::string> slots;
    slots["persona"] = bundle.persona;
    slots["examples"] = render_examples(bundle.examples);
    slots["contexts"] = render_contexts(bundle.contexts);
    slots["question"] = bundle.question;
    slots["options"] = render_options(bundle.options);
    slots["constraint"] = bundle.constraint;
    return tmpl.render(slots);
}

std::optional<char> parse_answer(std::string_view raw, const std::vector<char>& valid_letters) {
    if (valid_letters.empty()) {
        throw std::invalid_argument("parse_answer: valid_letters must be non-empty");
    }
    auto is_valid = [&](char c) {
        return std::find(valid_letters.begin(), valid_letters.end(), c) != valid_letters.end();
    };

    // Strict pass: the whole trimmed response is one valid letter.
    std::size_t b = 0, e = raw.size();
    while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
    if (e - b == 1 && is_valid(raw[b])) return raw[b];

    // Lenient pass: standalone valid capital letter tokens, where a token is
    // a maximal run of ASCII alphanumerics. Distinct candidates -> ambiguous.
    std::optional<char> found;
    std::size_t i = 0;
    while (i < raw.size()) {
        if (!std::isalnum(static_cast<unsigned char>(raw[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < raw.size() && std::isalnum(static_cast<unsigned char>(raw[j]))) ++j;
        if (j - i == 1 && is_valid(raw[i])) {
            if (found && *found != raw[i]) return std::nullopt;  // ambiguous
            found = raw[i];
        }
        i = j;
    }
    return found;
}

// ---------------------------------------------------------------------------
// Few-shot selection
// ---------------------------------------------------------------------------

FewShotSelection select_few_shot(const std::vector<McqItem>& dev_set, std::size_t count,
                                 uint64_t seed) {
    FewShotSelection out;
    if (count == 0) return out;

    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < dev_set.size(); ++i) {
        if (dev_set[i].gold) labeled.push_back(i);
    }
    if (labeled.size() < count) {
        throw std::invalid_argument("few-shot selection needs " + std::to_string(count) +
                                    " gold-labeled items, dev set has " +
                                    std::to_string(labeled.size()));
    }
    std::mt19937_64 rng(seed);
    // Fisher-Yates prefix of length `count`.
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, labeled.size() - 1);
        std::swap(labeled[i], labeled[pick(rng)]);
    }
    for (std::size_t i = 0; i < count; ++i) {
        const McqItem& item = dev_set[labeled[i]];
        out.examples.push_back({item.question, item.options, *item.gold, ""});
        out.item_ids.push_back(item.id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

const char* to_string(Mode mode) {
    return mode == Mode::Baseline ? "baseline" : "rag";
}

Mode mode_from_string(std::string_view s) {
    if (s == "baseline") return Mode::Baseline;
    if (s == "rag") return Mode::Rag;
    throw std::invalid_argument("unknown mode '" + std::string(s) + "' (use baseline|rag)");
}

Pipeline::Pipeline(const corpus::Kb& kb, const sparse::Bm25Index& index,
                   const dense::VectorMap& vectors, Providers providers,
                   const textnorm::Normalizer& norm, PipelineConfig cfg, PromptTemplate tmpl)
    : kb_(kb),
      index_(index),
      vectors_(vectors),
      providers_(providers),
      norm_(norm),
      cfg_(std::move(cfg)),
      tmpl_(std::move(tmpl)) {
    cfg_.validate();
}

std::string Pipeline::compose_query(const McqItem& item) const {
    std::string query = item.question;
    if (cfg_.query_includes_options) {
        for (const auto& [_, text] : item.options) {
            query.push_back('\n');
            query += text;
        }
    }
    return query;
}

namespace {

template <typename Fn>
auto stage_guard(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(stage) + ": " + e.what());
    }
}

}  // namespace

PipelineTrace Pipeline::answer(const McqItem& item, Mode mode,
                               const std::vector<FewShotExample>& examples) const {
    item.validate();
    PipelineTrace trace;
    trace.item_id = item.id;

    std::vector<ContextPassage> contexts;
    if (mode == Mode::Rag) {
        const std::string raw_query = compose_query(item);
        const auto query_tokens = norm_.full(raw_query);
        const std::string query_light = norm_.light(raw_query);

        trace.sparse = stage_guard("sparse", [&] {
            return index_.retrieve(query_tokens, cfg_.sparse_n);
        });
        if (!trace.sparse.empty()) {
            trace.dense = stage_guard("dense", [&] {
                const auto qvec = providers_.embedder->embed({query_light}).at(0);
                return dense::retrieve_dense(qvec, trace.sparse, vectors_, cfg_.dense_m);
            });
            trace.rerank = stage_guard("rerank", [&] {
                return rerank::rerank(
                    *providers_.scorer, query_light, trace.dense,
                    [&](const std::string& id) {
                        const corpus::Chunk* c = kb_.find(id);
                        if (!c) throw std::invalid_argument("unknown chunk '" + id + "'");
                        return c->light;
                    },
                    cfg_.rerank_k);
            });
            for (std::size_t i = 0; i < trace.rerank.size(); ++i) {
                const auto& rp = trace.rerank[i];
                const corpus::Chunk* c = kb_.find(rp.chunk_id);
                if (!c) {
                    throw std::runtime_error("rerank: unknown chunk '" + rp.chunk_id + "'");
                }
                contexts.push_back({i + 1, rp.score, rp.chunk_id, c->original});
            }
        }
    }

    const PromptBundle bundle = assemble_prompt(item, contexts, examples);
    trace.prompt = render_prompt(bundle, tmpl_);

    const LlmOptions llm_opts;
    auto call_llm = [&]() -> std::string {
        std::string last_error;
        for (int attempt = 0; attempt < 3; ++attempt) {
            try {
                return providers_.llm->complete(trace.prompt, llm_opts);
            } catch (const std::exception& e) {
                last_error = e.what();
                std::this_thread::sleep_for(std::chrono::milliseconds(20 << attempt));
            }
        }
        throw std::runtime_error("llm: call failed after 3 attempts: " + last_error);
    };

    trace.raw_response = call_llm();
    trace.predicted = parse_answer(trace.raw_response, item.letters());
    if (!trace.predicted) {
        // One retry on an unparseable response, then the verdict is invalid.
        trace.raw_response = call_llm();
        trace.predicted = parse_answer(trace.raw_response, item.letters());
    }
    return trace;
}

}  // namespace bahith::rag
