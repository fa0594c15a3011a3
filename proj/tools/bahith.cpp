// bahith — hybrid sparse/dense retrieval and RAG engine for Arabic MCQ
// answering. Subcommands: build-kb, index, query, answer, eval, compare.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bahith/corpus.hpp"
#include "bahith/dense.hpp"
#include "bahith/evalharness.hpp"
#include "bahith/http_providers.hpp"
#include "bahith/providers.hpp"
#include "bahith/ragflow.hpp"
#include "bahith/rerank.hpp"
#include "bahith/sparse.hpp"
#include "bahith/textnorm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bahith;

namespace {

// ---------------------------------------------------------------------------
// Run configuration: built-in defaults < config file < command-line flags.
// Secrets never appear here; tokens come from BAHITH_EMBED_TOKEN,
// BAHITH_RERANK_TOKEN and BAHITH_LLM_TOKEN.
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string kb_path;
    std::string index_path;
    std::string vectors_path;
    std::string template_path;
    std::string stopwords_path;
    std::string citation_rules_path;

    rag::PipelineConfig pipeline;
    bool ta_marbuta_to_ha = true;
    std::size_t embed_batch = 8;

    std::string mode = "rag";
    uint64_t seed = 42;
    int jobs = 1;
    bool stub_providers = false;

    std::string embed_url;
    std::string rerank_url;
    std::string llm_url;
    std::string llm_model;

    json to_json() const {
        return json{
            {"kb", kb_path},
            {"index", index_path},
            {"vectors", vectors_path},
            {"template", template_path},
            {"stopwords", stopwords_path},
            {"citation_rules", citation_rules_path},
            {"mode", mode},
            {"seed", seed},
            {"jobs", jobs},
            {"stub_providers", stub_providers},
            {"ta_marbuta_to_ha", ta_marbuta_to_ha},
            {"embed_batch", embed_batch},
            {"pipeline",
             {{"n", pipeline.sparse_n},
              {"m", pipeline.dense_m},
              {"k", pipeline.rerank_k},
              {"k1", pipeline.bm25.k1},
              {"b", pipeline.bm25.b},
              {"dimension", pipeline.dimension},
              {"query_includes_options", pipeline.query_includes_options},
              {"few_shot_count", pipeline.few_shot_count},
              {"chunk",
               {{"target_tokens", pipeline.chunk.target_tokens},
                {"overlap_tokens", pipeline.chunk.overlap_tokens},
                {"min_tokens", pipeline.chunk.min_tokens},
                {"max_tokens", pipeline.chunk.max_tokens}}}}},
            {"providers",
             {{"embed_url", embed_url},
              {"rerank_url", rerank_url},
              {"llm_url", llm_url},
              {"llm_model", llm_model}}},
        };
    }

    std::string digest() const {
        // jobs is an execution knob that cannot change results, so it stays
        // out of the digest.
        json j = to_json();
        j.erase("jobs");
        char buf[20];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(dense::content_hash(j.dump())));
        return buf;
    }

    void merge_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw std::runtime_error("config file " + path + ": " + e.what());
        }
        merge(j);
    }

    void merge(const json& j) {
        auto get = [&](const json& obj, const char* key, auto& field) {
            if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
        };
        get(j, "kb", kb_path);
        get(j, "index", index_path);
        get(j, "vectors", vectors_path);
        get(j, "template", template_path);
        get(j, "stopwords", stopwords_path);
        get(j, "citation_rules", citation_rules_path);
        get(j, "mode", mode);
        get(j, "seed", seed);
        get(j, "jobs", jobs);
        get(j, "stub_providers", stub_providers);
        get(j, "ta_marbuta_to_ha", ta_marbuta_to_ha);
        get(j, "embed_batch", embed_batch);
        if (j.contains("pipeline")) {
            const json& p = j.at("pipeline");
            get(p, "n", pipeline.sparse_n);
            get(p, "m", pipeline.dense_m);
            get(p, "k", pipeline.rerank_k);
            get(p, "k1", pipeline.bm25.k1);
            get(p, "b", pipeline.bm25.b);
            get(p, "dimension", pipeline.dimension);
            get(p, "query_includes_options", pipeline.query_includes_options);
            get(p, "few_shot_count", pipeline.few_shot_count);
            if (p.contains("chunk")) {
                const json& c = p.at("chunk");
                get(c, "target_tokens", pipeline.chunk.target_tokens);
                get(c, "overlap_tokens", pipeline.chunk.overlap_tokens);
                get(c, "min_tokens", pipeline.chunk.min_tokens);
                get(c, "max_tokens", pipeline.chunk.max_tokens);
            }
        }
        if (j.contains("providers")) {
            const json& p = j.at("providers");
            get(p, "embed_url", embed_url);
            get(p, "rerank_url", rerank_url);
            get(p, "llm_url", llm_url);
            get(p, "llm_model", llm_model);
        }
    }

    textnorm::Normalizer make_normalizer() const {
        textnorm::NormConfig norm_cfg;
        norm_cfg.ta_marbuta_to_ha = ta_marbuta_to_ha;
        if (!citation_rules_path.empty()) {
            norm_cfg.citations = textnorm::CitationRules::load(citation_rules_path);
        }
        textnorm::StopwordSet stops = stopwords_path.empty()
                                          ? textnorm::default_stopwords()
                                          : textnorm::load_stopwords(stopwords_path,
                                                                     ta_marbuta_to_ha);
        return textnorm::Normalizer(std::move(stops), std::move(norm_cfg));
    }

    rag::PromptTemplate make_template() const {
        return template_path.empty() ? rag::PromptTemplate::defaults()
                                     : rag::PromptTemplate::load(template_path);
    }
};

// Attaches --config plus the flags common to retrieval commands.
void add_common_flags(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
    cmd->add_flag("--stub-providers", cfg.stub_providers,
                  "deterministic offline providers (hashed-trigram embedder, token-overlap "
                  "scorer, context-echo LLM)");
    cmd->add_option("--stopwords", cfg.stopwords_path, "stopword file (default: built-in list)");
    cmd->add_option("--citation-rules", cfg.citation_rules_path,
                    "citation rule file (default: built-in rules)");
    cmd->add_option("--template", cfg.template_path,
                    "prompt template file (default: built-in scaffold)");
    cmd->add_option("--embed-url", cfg.embed_url, "embedding endpoint base URL");
    cmd->add_option("--rerank-url", cfg.rerank_url, "cross-encoder endpoint base URL");
    cmd->add_option("--llm-url", cfg.llm_url, "LLM endpoint base URL");
    cmd->add_option("--llm-model", cfg.llm_model, "LLM model name");
    cmd->add_option("-n,--sparse-n", cfg.pipeline.sparse_n, "stage-1 candidate count");
    cmd->add_option("-m,--dense-m", cfg.pipeline.dense_m, "stage-2 candidate count");
    cmd->add_option("-k,--rerank-k", cfg.pipeline.rerank_k, "contexts handed to the LLM");
    cmd->add_option("--k1", cfg.pipeline.bm25.k1, "BM25 term-frequency saturation");
    cmd->add_option("--b", cfg.pipeline.bm25.b, "BM25 length normalization");
    cmd->add_option("--dimension", cfg.pipeline.dimension, "embedding dimension");
    cmd->add_option("--seed", cfg.seed, "seed for few-shot selection");
}

struct ProviderSet {
    std::unique_ptr<dense::EmbeddingProvider> embedder;
    std::unique_ptr<rerank::PairScorer> scorer;
    std::unique_ptr<rag::LlmProvider> llm;

    rag::Providers handles() const {
        return rag::Providers{embedder.get(), scorer.get(), llm.get()};
    }
};

ProviderSet make_providers(const RunConfig& cfg) {
    ProviderSet set;
    if (cfg.stub_providers) {
        set.embedder = std::make_unique<providers::HashedTrigramEmbedder>(cfg.pipeline.dimension);
        set.scorer = std::make_unique<providers::TokenOverlapScorer>();
        set.llm = std::make_unique<providers::ContextEchoLlm>();
        return set;
    }
    if (!cfg.embed_url.empty()) {
        providers::HttpOptions opts;
        opts.token_env = "BAHITH_EMBED_TOKEN";
        set.embedder = std::make_unique<providers::HttpEmbeddingProvider>(
            cfg.embed_url, cfg.pipeline.dimension, opts);
    }
    if (!cfg.rerank_url.empty()) {
        providers::HttpOptions opts;
        opts.token_env = "BAHITH_RERANK_TOKEN";
        set.scorer = std::make_unique<providers::HttpPairScorer>(cfg.rerank_url, opts);
    }
    if (!cfg.llm_url.empty()) {
        providers::HttpOptions opts;
        opts.token_env = "BAHITH_LLM_TOKEN";
        set.llm = std::make_unique<providers::HttpLlmProvider>(cfg.llm_url, cfg.llm_model, opts);
    }
    return set;
}

[[noreturn]] void missing_provider(const char* which, const char* flag) {
    throw std::runtime_error(std::string("no ") + which +
                             " provider configured: pass --stub-providers for deterministic "
                             "offline mode, or configure " +
                             flag);
}

// Vector map for the kb chunks out of a cache file; complains when chunks are
// missing from it.
dense::VectorMap vectors_for(const corpus::Kb& kb, const dense::VectorCache& cache) {
    dense::VectorMap out;
    out.reserve(kb.size());
    std::size_t missing = 0;
    for (const auto& c : kb.chunks()) {
        const dense::Vec* v = cache.find(dense::content_hash(c.light));
        if (v == nullptr) {
            ++missing;
            continue;
        }
        out.emplace(c.id, *v);
    }
    if (missing > 0) {
        throw std::runtime_error("vector cache is missing " + std::to_string(missing) + " of " +
                                 std::to_string(kb.size()) +
                                 " chunks; rerun `bahith index --vectors ...` (or use "
                                 "--stub-providers)");
    }
    return out;
}

std::string preview(const std::string& text, std::size_t limit = 90) {
    std::string out;
    for (char c : text) {
        out.push_back(c == '\n' || c == '\t' ? ' ' : c);
        if (out.size() >= limit) {
            out += "...";
            break;
        }
    }
    return out;
}

json stage_json(const std::vector<RankedPassage>& list) {
    json arr = json::array();
    for (const auto& r : list) arr.push_back({{"id", r.chunk_id}, {"score", r.score}});
    return arr;
}

void print_stage(const std::string& name, const std::vector<RankedPassage>& list,
                 const corpus::Kb& kb, std::size_t show = 10) {
    std::printf("%s: %zu candidate(s)\n", name.c_str(), list.size());
    for (std::size_t i = 0; i < list.size() && i < show; ++i) {
        const corpus::Chunk* c = kb.find(list[i].chunk_id);
        std::printf("  %2zu. %-18s %10.4f  %s\n", i + 1, list[i].chunk_id.c_str(),
                    list[i].score, c ? preview(c->original, 70).c_str() : "");
    }
    if (list.size() > show) std::printf("  ... %zu more\n", list.size() - show);
}

// ---------------------------------------------------------------------------
// build-kb
// ---------------------------------------------------------------------------

int cmd_build_kb(const RunConfig& cfg, const std::vector<std::string>& fatwa_files,
                 const std::vector<std::string>& book_files, const std::string& out_path) {
    if (fatwa_files.empty() && book_files.empty()) {
        std::fprintf(stderr, "error: no sources (pass --fatwas and/or --book)\n");
        return 1;
    }
    const auto norm = cfg.make_normalizer();
    cfg.pipeline.chunk.validate();

    std::vector<corpus::Chunk> chunks;
    std::vector<std::string> failures;
    struct SourceStat {
        std::string name;
        std::size_t chunks;
    };
    std::vector<SourceStat> stats;

    std::vector<corpus::FatwaRecord> records;
    for (const auto& path : fatwa_files) {
        try {
            auto file_records = corpus::load_fatwa_jsonl(path);
            records.insert(records.end(), file_records.begin(), file_records.end());
            stats.push_back({path, file_records.size()});
        } catch (const std::exception& e) {
            failures.push_back(path + ": " + e.what());
        }
    }
    auto ingest = corpus::ingest_fatwas(records, norm);
    for (const auto& err : ingest.errors) {
        std::fprintf(stderr, "warning: fatwa record %zu skipped: %s\n", err.record_index,
                     err.message.c_str());
    }
    chunks = std::move(ingest.chunks);
    const std::size_t fatwa_chunks = chunks.size();

    for (const auto& path : book_files) {
        try {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw std::runtime_error("cannot open file");
            std::ostringstream ss;
            ss << in.rdbuf();
            const std::string ext = fs::path(path).extension().string();
            const corpus::DocFormat format = (ext == ".html" || ext == ".htm")
                                                 ? corpus::DocFormat::Html
                                             : ext == ".xml" ? corpus::DocFormat::DocxXml
                                                             : corpus::DocFormat::Plain;
            const auto paragraphs = corpus::extract_paragraphs(ss.str(), format);
            const std::string source_id = fs::path(path).stem().string();
            auto book_chunks = corpus::chunk_paragraphs(paragraphs, source_id,
                                                        cfg.pipeline.chunk, norm);
            stats.push_back({path, book_chunks.size()});
            for (auto& c : book_chunks) chunks.push_back(std::move(c));
        } catch (const std::exception& e) {
            failures.push_back(path + ": " + e.what());
        }
    }

    if (!failures.empty()) {
        std::fprintf(stderr, "error: %zu source(s) failed to parse; no store written\n",
                     failures.size());
        for (const auto& f : failures) std::fprintf(stderr, "  %s\n", f.c_str());
        return 1;
    }

    corpus::Kb kb(std::move(chunks), cfg.pipeline.chunk);
    corpus::save_kb(kb, out_path);

    uint64_t total_tokens = 0;
    uint32_t min_tokens = kb.size() ? UINT32_MAX : 0;
    uint32_t max_tokens = 0;
    for (const auto& c : kb.chunks()) {
        total_tokens += c.token_count;
        min_tokens = std::min(min_tokens, c.token_count);
        max_tokens = std::max(max_tokens, c.token_count);
    }
    std::printf("knowledge base: %s\n", out_path.c_str());
    for (const auto& s : stats) std::printf("  source %-40s %zu unit(s)\n", s.name.c_str(), s.chunks);
    std::printf("  fatwa chunks: %zu, book chunks: %zu, total: %zu\n", fatwa_chunks,
                kb.size() - fatwa_chunks, kb.size());
    if (kb.size() > 0) {
        std::printf("  tokens per chunk: min %u, mean %.1f, max %u\n", min_tokens,
                    static_cast<double>(total_tokens) / static_cast<double>(kb.size()),
                    max_tokens);
    }
    std::printf("config digest: %s\n", cfg.digest().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// index
// ---------------------------------------------------------------------------

int cmd_index(const RunConfig& cfg, const std::string& out_index) {
    const corpus::Kb kb = corpus::load_kb(cfg.kb_path);
    const auto index = sparse::Bm25Index::build(kb.chunks(), cfg.pipeline.bm25);
    if (!out_index.empty()) {
        index.save(out_index);
        std::printf("bm25 index: %s (%zu docs, %zu terms, avg len %.2f)\n", out_index.c_str(),
                    index.doc_count(), index.term_count(), index.avg_doc_len());
    }

    if (!cfg.vectors_path.empty()) {
        auto providers = make_providers(cfg);
        dense::VectorCache cache;
        if (fs::exists(cfg.vectors_path)) cache = dense::VectorCache::load(cfg.vectors_path);

        if (!providers.embedder) {
            // no provider: acceptable only when the cache already covers the kb
            std::size_t missing = 0;
            for (const auto& c : kb.chunks()) {
                if (cache.find(dense::content_hash(c.light)) == nullptr) ++missing;
            }
            if (missing > 0) missing_provider("embedding", "--embed-url");
            std::printf("vector cache complete: %s (%zu vectors, no provider calls)\n",
                        cfg.vectors_path.c_str(), cache.size());
        } else {
            dense::EmbedOptions opts;
            opts.batch_size = cfg.embed_batch;
            opts.cache_path = cfg.vectors_path;
            const std::size_t before = cache.size();
            dense::embed_corpus(*providers.embedder, kb.chunks(), cache, opts);
            std::printf("vector cache: %s (%zu vectors, %zu new, provider %s)\n",
                        cfg.vectors_path.c_str(), cache.size(), cache.size() - before,
                        providers.embedder->id().c_str());
        }
    }
    std::printf("config digest: %s\n", cfg.digest().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// query
// ---------------------------------------------------------------------------

int cmd_query(const RunConfig& cfg, const std::string& question, bool as_json) {
    const auto norm = cfg.make_normalizer();
    const corpus::Kb kb = corpus::load_kb(cfg.kb_path);
    const auto index = sparse::Bm25Index::load(cfg.index_path);
    auto providers = make_providers(cfg);
    if (!providers.embedder) missing_provider("embedding", "--embed-url");
    if (!providers.scorer) missing_provider("cross-encoder", "--rerank-url");

    const auto cache = dense::VectorCache::load(cfg.vectors_path);
    const auto vectors = vectors_for(kb, cache);

    const auto tokens = norm.full(question);
    const std::string light = norm.light(question);

    const auto sparse_hits = index.retrieve(tokens, cfg.pipeline.sparse_n);
    std::vector<RankedPassage> dense_hits, rerank_hits;
    if (!sparse_hits.empty()) {
        const auto qvec = providers.embedder->embed({light}).at(0);
        dense_hits = dense::retrieve_dense(qvec, sparse_hits, vectors, cfg.pipeline.dense_m);
        rerank_hits = rerank::rerank(
            *providers.scorer, light, dense_hits,
            [&](const std::string& id) {
                const corpus::Chunk* c = kb.find(id);
                if (!c) throw std::invalid_argument("unknown chunk '" + id + "'");
                return c->light;
            },
            cfg.pipeline.rerank_k);
    }

    if (as_json) {
        json out{{"query", question},
                 {"tokens", tokens},
                 {"sparse", stage_json(sparse_hits)},
                 {"dense", stage_json(dense_hits)},
                 {"rerank", stage_json(rerank_hits)},
                 {"config_digest", cfg.digest()}};
        std::printf("%s\n", out.dump(2).c_str());
    } else {
        std::printf("query tokens:");
        for (const auto& t : tokens) std::printf(" %s", t.c_str());
        std::printf("\n\n");
        print_stage("stage 1 (bm25)", sparse_hits, kb);
        print_stage("stage 2 (dense cosine)", dense_hits, kb);
        print_stage("stage 3 (cross-encoder)", rerank_hits, kb, cfg.pipeline.rerank_k);
        std::printf("\nconfig digest: %s\n", cfg.digest().c_str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// answer + eval shared plumbing
// ---------------------------------------------------------------------------

json trace_json(const rag::PipelineTrace& trace, const std::optional<char>& gold) {
    return json{{"item_id", trace.item_id},
                {"gold", gold ? std::string(1, *gold) : ""},
                {"predicted", trace.predicted ? std::string(1, *trace.predicted) : ""},
                {"stages",
                 {{"sparse", stage_json(trace.sparse)},
                  {"dense", stage_json(trace.dense)},
                  {"rerank", stage_json(trace.rerank)}}},
                {"prompt", trace.prompt},
                {"response", trace.raw_response}};
}

int cmd_answer(const RunConfig& cfg, const std::string& question,
               const std::vector<std::string>& option_specs, const std::string& gold,
               bool show_prompt) {
    rag::McqItem item;
    item.id = "cli";
    item.question = question;
    for (const auto& spec : option_specs) {
        const auto eq = spec.find('=');
        if (eq != 1) {
            throw std::runtime_error("option must look like L=text (got '" + spec + "')");
        }
        item.options.emplace_back(spec[0], spec.substr(2));
    }
    if (!gold.empty()) {
        if (gold.size() != 1) throw std::runtime_error("--gold must be a single letter");
        item.gold = gold[0];
    }
    item.validate();

    const auto norm = cfg.make_normalizer();
    const rag::Mode mode = rag::mode_from_string(cfg.mode);

    corpus::Kb kb;
    sparse::Bm25Index index;
    dense::VectorMap vectors;
    if (mode == rag::Mode::Rag) {
        kb = corpus::load_kb(cfg.kb_path);
        index = sparse::Bm25Index::load(cfg.index_path);
        vectors = vectors_for(kb, dense::VectorCache::load(cfg.vectors_path));
    }
    auto providers = make_providers(cfg);
    if (!providers.llm) missing_provider("LLM", "--llm-url/--llm-model");
    if (mode == rag::Mode::Rag) {
        if (!providers.embedder) missing_provider("embedding", "--embed-url");
        if (!providers.scorer) missing_provider("cross-encoder", "--rerank-url");
    }

    rag::Pipeline pipeline(kb, index, vectors, providers.handles(), norm, cfg.pipeline,
                           cfg.make_template());
    const auto trace = pipeline.answer(item, mode);

    if (show_prompt) std::printf("----- prompt -----\n%s\n------------------\n", trace.prompt.c_str());
    std::printf("predicted: %s\n",
                trace.predicted ? std::string(1, *trace.predicted).c_str() : "invalid");
    if (item.gold) {
        std::printf("gold: %c (%s)\n", *item.gold,
                    trace.predicted && *trace.predicted == *item.gold ? "correct" : "incorrect");
    }
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& dataset_path, const std::string& out_dir,
             const std::string& few_shot_from) {
    const auto norm = cfg.make_normalizer();
    const rag::Mode mode = rag::mode_from_string(cfg.mode);
    auto items = eval::load_dataset(dataset_path, /*require_gold=*/true);

    corpus::Kb kb;
    sparse::Bm25Index index;
    dense::VectorMap vectors;
    auto providers = make_providers(cfg);
    if (!providers.llm) missing_provider("LLM", "--llm-url/--llm-model");
    if (mode == rag::Mode::Rag) {
        kb = corpus::load_kb(cfg.kb_path);
        index = sparse::Bm25Index::load(cfg.index_path);
        vectors = vectors_for(kb, dense::VectorCache::load(cfg.vectors_path));
        if (!providers.embedder) missing_provider("embedding", "--embed-url");
        if (!providers.scorer) missing_provider("cross-encoder", "--rerank-url");
    }

    // Few-shot examples come from a dev file when given; otherwise they are
    // drawn from the eval set and excluded from scoring.
    std::vector<rag::FewShotExample> examples;
    if (cfg.pipeline.few_shot_count > 0) {
        if (!few_shot_from.empty()) {
            const auto dev = eval::load_dataset(few_shot_from, /*require_gold=*/true);
            examples = rag::select_few_shot(dev, cfg.pipeline.few_shot_count, cfg.seed).examples;
        } else {
            auto selection = rag::select_few_shot(items, cfg.pipeline.few_shot_count, cfg.seed);
            examples = std::move(selection.examples);
            std::vector<rag::McqItem> kept;
            kept.reserve(items.size());
            for (auto& item : items) {
                const bool excluded =
                    std::find(selection.item_ids.begin(), selection.item_ids.end(), item.id) !=
                    selection.item_ids.end();
                if (!excluded) kept.push_back(std::move(item));
            }
            std::printf("few-shot: %zu example(s) drawn from the dataset and excluded\n",
                        selection.item_ids.size());
            items = std::move(kept);
        }
    }
    if (items.empty()) throw std::runtime_error("no items left to evaluate");

    rag::Pipeline pipeline(kb, index, vectors, providers.handles(), norm, cfg.pipeline,
                           cfg.make_template());

    struct ItemResult {
        rag::PipelineTrace trace;
        std::string error;
    };
    std::vector<ItemResult> results(items.size());
    std::atomic<std::size_t> next{0};
    const int jobs = std::max(1, cfg.jobs);
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= items.size()) break;
            try {
                results[i].trace = pipeline.answer(items[i], mode, examples);
            } catch (const std::exception& e) {
                results[i].error = e.what();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    fs::create_directories(out_dir);
    const std::string digest = cfg.digest();

    std::ofstream trace_out(fs::path(out_dir) / "trace.jsonl", std::ios::binary | std::ios::trunc);
    trace_out << json{{"format", "bahith-trace"},
                      {"version", 1},
                      {"mode", cfg.mode},
                      {"config", cfg.to_json()},
                      {"config_digest", digest}}
                     .dump()
              << "\n";

    std::vector<eval::Verdict> verdicts;
    std::size_t harness_errors = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!results[i].error.empty()) {
            ++harness_errors;
            std::fprintf(stderr, "error: item %s: %s\n", items[i].id.c_str(),
                         results[i].error.c_str());
            trace_out << json{{"item_id", items[i].id}, {"error", results[i].error}}.dump()
                      << "\n";
            continue;
        }
        trace_out << trace_json(results[i].trace, items[i].gold).dump() << "\n";
        verdicts.push_back(eval::make_verdict(items[i], results[i].trace.predicted));
    }
    trace_out.close();

    if (!verdicts.empty()) {
        const auto report = eval::evaluate(verdicts, digest);
        eval::save_report(report, (fs::path(out_dir) / "report.json").string());
        const std::string rendered = eval::render_report(report);
        std::ofstream txt(fs::path(out_dir) / "report.txt", std::ios::binary | std::ios::trunc);
        txt << "mode: " << cfg.mode << "\n" << rendered;
        std::printf("mode: %s\n%s", cfg.mode.c_str(), rendered.c_str());
    }
    if (harness_errors > 0) {
        std::fprintf(stderr, "error: %zu item(s) failed at the harness level\n", harness_errors);
        return 1;
    }
    return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path,
                const std::string& out_path) {
    const auto a = eval::load_report(a_path);
    const auto b = eval::load_report(b_path);
    const auto summary = eval::compare_runs(a, b);
    std::printf("%s", eval::render_compare(summary).c_str());
    if (!out_path.empty()) {
        json buckets = json::object();
        for (const auto& [level, delta] : summary.bucket_delta) {
            buckets[rag::to_string(level)] = delta;
        }
        json out{{"overall_delta", summary.overall_delta},
                 {"bucket_delta", buckets},
                 {"fixed", summary.fixed},
                 {"broken", summary.broken}};
        std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
        f << out.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bahith: hybrid sparse-dense retrieval and RAG engine for Arabic MCQ"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;

    // build-kb
    auto* build = app.add_subcommand("build-kb", "construct the chunked knowledge base");
    std::vector<std::string> fatwa_files, book_files;
    std::string out_store;
    build->add_option("--fatwas", fatwa_files, "fatwa JSONL file(s), one unit per record");
    build->add_option("--book", book_files, "book file(s): .html/.htm, .xml (docx main part), or plain text");
    build->add_option("--out", out_store, "chunk store output path")->required();
    build->add_option("--config", config_path, "JSON config file (flags override it)");
    build->add_option("--stopwords", cfg.stopwords_path, "stopword file");
    build->add_option("--citation-rules", cfg.citation_rules_path, "citation rule file");
    build->add_option("--target-tokens", cfg.pipeline.chunk.target_tokens, "chunk target size");
    build->add_option("--overlap-tokens", cfg.pipeline.chunk.overlap_tokens, "chunk overlap");
    build->add_option("--min-tokens", cfg.pipeline.chunk.min_tokens, "chunk minimum size");
    build->add_option("--max-tokens", cfg.pipeline.chunk.max_tokens, "chunk maximum size");

    // index
    auto* index_cmd = app.add_subcommand("index", "build the BM25 index and the vector cache");
    std::string out_index;
    index_cmd->add_option("--kb", cfg.kb_path, "chunk store")->required();
    index_cmd->add_option("--out-index", out_index, "BM25 index output path");
    index_cmd->add_option("--vectors", cfg.vectors_path, "vector cache path to build/extend");
    index_cmd->add_option("--embed-batch", cfg.embed_batch, "embedding batch size");
    add_common_flags(index_cmd, cfg, config_path);

    // query
    auto* query_cmd = app.add_subcommand("query", "inspect the three retrieval stages");
    std::string question;
    bool as_json = false;
    query_cmd->add_option("question", question, "query text")->required();
    query_cmd->add_option("--kb", cfg.kb_path, "chunk store")->required();
    query_cmd->add_option("--index", cfg.index_path, "BM25 index")->required();
    query_cmd->add_option("--vectors", cfg.vectors_path, "vector cache")->required();
    query_cmd->add_flag("--json", as_json, "machine-readable output");
    add_common_flags(query_cmd, cfg, config_path);

    // answer
    auto* answer_cmd = app.add_subcommand("answer", "answer one multiple-choice question");
    std::vector<std::string> option_specs;
    std::string gold, answer_question;
    bool show_prompt = false;
    answer_cmd->add_option("--question", answer_question, "question text")->required();
    answer_cmd->add_option("--option", option_specs, "option as L=text (repeat per letter)")
        ->required();
    answer_cmd->add_option("--gold", gold, "gold letter (optional)");
    answer_cmd->add_option("--mode", cfg.mode, "baseline|rag");
    answer_cmd->add_option("--kb", cfg.kb_path, "chunk store");
    answer_cmd->add_option("--index", cfg.index_path, "BM25 index");
    answer_cmd->add_option("--vectors", cfg.vectors_path, "vector cache");
    answer_cmd->add_flag("--show-prompt", show_prompt, "print the rendered prompt");
    add_common_flags(answer_cmd, cfg, config_path);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "run the MCQ evaluation harness");
    std::string dataset_path, out_dir, few_shot_from;
    eval_cmd->add_option("--dataset", dataset_path, "MCQ dataset (JSONL)")->required();
    eval_cmd->add_option("--out-dir", out_dir, "directory for report + trace files")->required();
    eval_cmd->add_option("--mode", cfg.mode, "baseline|rag");
    eval_cmd->add_option("--kb", cfg.kb_path, "chunk store");
    eval_cmd->add_option("--index", cfg.index_path, "BM25 index");
    eval_cmd->add_option("--vectors", cfg.vectors_path, "vector cache");
    eval_cmd->add_option("--jobs", cfg.jobs, "concurrent items");
    eval_cmd->add_option("--few-shot-from", few_shot_from,
                         "dev-set file for few-shot examples (default: drawn from the dataset "
                         "and excluded)");
    eval_cmd->add_option("--few-shot-count", cfg.pipeline.few_shot_count, "examples per prompt");
    add_common_flags(eval_cmd, cfg, config_path);

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "diff two evaluation reports");
    std::string report_a, report_b, compare_out;
    compare_cmd->add_option("--a", report_a, "first report.json (baseline)")->required();
    compare_cmd->add_option("--b", report_b, "second report.json (candidate)")->required();
    compare_cmd->add_option("--out", compare_out, "write the delta summary as JSON");

    // precedence: defaults < config file < flags. The config file is merged
    // before the parse so flag values land on top of it.
    try {
        for (int i = 1; i + 1 < argc || i < argc; ++i) {
            const std::string_view arg = argv[i];
            if (arg == "--config" && i + 1 < argc) {
                cfg.merge_file(argv[i + 1]);
                break;
            }
            if (arg.rfind("--config=", 0) == 0) {
                cfg.merge_file(std::string(arg.substr(9)));
                break;
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.pipeline.validate();

        if (build->parsed()) return cmd_build_kb(cfg, fatwa_files, book_files, out_store);
        if (index_cmd->parsed()) return cmd_index(cfg, out_index);
        if (query_cmd->parsed()) return cmd_query(cfg, question, as_json);
        if (answer_cmd->parsed()) return cmd_answer(cfg, answer_question, option_specs, gold,
                                                    show_prompt);
        if (eval_cmd->parsed()) return cmd_eval(cfg, dataset_path, out_dir, few_shot_from);
        if (compare_cmd->parsed()) return cmd_compare(report_a, report_b, compare_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
