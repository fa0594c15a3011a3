#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "bahith/corpus.hpp"
#include "bahith/dense.hpp"
#include "bahith/providers.hpp"
#include "bahith/sparse.hpp"
#include "bahith/textnorm.hpp"

using namespace bahith;

namespace {

// Synthetic Arabic-ish corpus: Zipf-free uniform draws from a fixed pool are
// enough to exercise postings and scoring paths.
const std::vector<std::string>& word_pool() {
    static const std::vector<std::string> pool = [] {
        static const char* stems[] = {"كتاب", "صلاه",  "زكاه",  "صوم",  "حج",    "علم",
                                      "فقه",  "حديث", "تفسير", "قول",  "دليل",  "حكم",
                                      "مال",  "بيع",   "نكاح",  "طلاق", "ميراث", "وصيه",
                                      "شرط",  "ركن"};
        std::vector<std::string> out;
        for (const char* s : stems) {
            out.emplace_back(s);
            for (int i = 0; i < 20; ++i) out.emplace_back(std::string(s) + std::to_string(i));
        }
        return out;
    }();
    return pool;
}

std::vector<std::string> make_tokens(std::mt19937_64& rng, std::size_t n) {
    const auto& pool = word_pool();
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(pool[pick(rng)]);
    return out;
}

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += " ";
        out += t;
    }
    return out;
}

std::vector<corpus::Chunk> make_corpus(std::size_t docs, std::size_t len, uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    std::vector<corpus::Chunk> chunks;
    chunks.reserve(docs);
    for (std::size_t d = 0; d < docs; ++d) {
        corpus::Chunk c;
        c.id = "doc" + std::to_string(100000 + d);
        c.source_id = c.id;
        c.full = make_tokens(rng, len);
        c.light = join(c.full);
        c.original = c.light;
        c.token_count = static_cast<uint32_t>(len);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

const std::string& arabic_prose() {
    static const std::string text = [] {
        std::string s;
        for (int i = 0; i < 200; ++i) {
            s += "الحمد لله رب العالمين، والصلاة والسلام على رسول الله (رواه مسلم) وبعد. ";
            s += "فإن أصدق الحديث كتاب الله، وخير الهدى هدى محمد صلى الله عليه وسلم [12]. ";
        }
        return s;
    }();
    return text;
}

}  // namespace

static void BM_NormalizeLight(benchmark::State& state) {
    const std::string& text = arabic_prose();
    for (auto _ : state) {
        benchmark::DoNotOptimize(textnorm::normalize_light(text));
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_NormalizeLight);

static void BM_NormalizeFull(benchmark::State& state) {
    const std::string& text = arabic_prose();
    const auto& stops = textnorm::default_stopwords();
    for (auto _ : state) {
        benchmark::DoNotOptimize(textnorm::normalize_full(text, stops));
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_NormalizeFull);

static void BM_ChunkParagraphs(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::vector<std::string> paragraphs;
    for (int p = 0; p < 50; ++p) paragraphs.push_back(join(make_tokens(rng, 180)));
    const textnorm::Normalizer norm;
    for (auto _ : state) {
        benchmark::DoNotOptimize(corpus::chunk_paragraphs(paragraphs, "bench", {}, norm));
    }
}
BENCHMARK(BM_ChunkParagraphs);

static void BM_Bm25Build(benchmark::State& state) {
    const auto chunks = make_corpus(static_cast<std::size_t>(state.range(0)), 120);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sparse::Bm25Index::build(chunks));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Bm25Build)->Range(256, 16384)->Complexity();

static void BM_Bm25Retrieve(benchmark::State& state) {
    const auto chunks = make_corpus(static_cast<std::size_t>(state.range(0)), 120);
    const auto index = sparse::Bm25Index::build(chunks);
    std::mt19937_64 rng(11);
    const auto query = make_tokens(rng, 12);
    for (auto _ : state) {
        benchmark::DoNotOptimize(index.retrieve(query, 1000));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Bm25Retrieve)->Range(256, 16384)->Complexity();

static void BM_TrigramEmbed(benchmark::State& state) {
    providers::HashedTrigramEmbedder embedder(768);
    std::mt19937_64 rng(5);
    const std::string text = join(make_tokens(rng, 200));
    for (auto _ : state) {
        benchmark::DoNotOptimize(embedder.embed_one(text));
    }
}
BENCHMARK(BM_TrigramEmbed);

static void BM_DenseTopK(benchmark::State& state) {
    providers::HashedTrigramEmbedder embedder(768);
    std::mt19937_64 rng(9);
    dense::VectorMap vectors;
    std::vector<RankedPassage> candidates;
    const auto n = static_cast<std::size_t>(state.range(0));
    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = "doc" + std::to_string(i);
        vectors.emplace(id, embedder.embed_one(join(make_tokens(rng, 40))));
        candidates.push_back({id, 1.0, Stage::Sparse});
    }
    const auto query = embedder.embed_one(join(make_tokens(rng, 12)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(dense::retrieve_dense(query, candidates, vectors, 200));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DenseTopK)->Range(128, 1024)->Complexity();

BENCHMARK_MAIN();
