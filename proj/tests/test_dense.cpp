#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "bahith/dense.hpp"
#include "bahith/providers.hpp"
#include "support/fixtures.hpp"

using namespace bahith;
using namespace bahith::dense;
using test::bare_chunk;

namespace {

Vec unit(std::size_t dim, std::size_t axis) {
    Vec v(dim, 0.0f);
    v[axis] = 1.0f;
    return v;
}

corpus::Chunk light_chunk(std::string id, std::string light) {
    corpus::Chunk c;
    c.id = std::move(id);
    c.light = std::move(light);
    return c;
}

// Provider wrapper that records batch sizes and can be told to fail.
class CountingProvider final : public EmbeddingProvider {
public:
    explicit CountingProvider(std::size_t dimension = 32, int fail_first_calls = 0,
                              int fail_batch_index = -1)
        : inner_(dimension), fail_calls_(fail_first_calls), fail_batch_(fail_batch_index) {}

    std::string id() const override { return inner_.id(); }
    std::size_t dimension() const override { return inner_.dimension(); }

    std::vector<Vec> embed(const std::vector<std::string>& texts) override {
        ++calls;
        if (fail_calls_ > 0) {
            --fail_calls_;
            throw std::runtime_error("transient failure");
        }
        if (fail_batch_ >= 0 && static_cast<int>(batch_sizes.size()) == fail_batch_) {
            throw std::runtime_error("permanent failure");
        }
        batch_sizes.push_back(texts.size());
        return inner_.embed(texts);
    }

    int calls = 0;
    std::vector<std::size_t> batch_sizes;

private:
    providers::HashedTrigramEmbedder inner_;
    int fail_calls_;
    int fail_batch_;
};

class WrongDimensionProvider final : public EmbeddingProvider {
public:
    std::string id() const override { return "wrong-dim"; }
    std::size_t dimension() const override { return 16; }
    std::vector<Vec> embed(const std::vector<std::string>& texts) override {
        return std::vector<Vec>(texts.size(), Vec(7, 0.5f));
    }
};

}  // namespace

TEST_CASE("cosine: self, orthogonal, colinear") {
    Vec v{0.3f, -0.7f, 0.1f, 2.0f};
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-9));

    CHECK(cosine(unit(8, 0), unit(8, 1)) == doctest::Approx(0.0));

    Vec a{1.0f, 2.0f, 2.0f, 0.0f, 0.0f};
    Vec b{2.0f, 4.0f, 4.0f, 0.0f, 0.0f};
    CHECK(cosine(a, b) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cosine: error cases") {
    Vec z(4, 0.0f);
    Vec v{1.0f, 0.0f, 0.0f, 0.0f};
    CHECK_THROWS_AS(cosine(z, v), std::invalid_argument);
    CHECK_THROWS_AS(cosine(v, z), std::invalid_argument);
    CHECK_THROWS_AS(cosine(v, Vec(3, 1.0f)), std::invalid_argument);
}

TEST_CASE("cosine bound property") {
    std::mt19937_64 rng(99);
    std::normal_distribution<float> d(0.0f, 1.0f);
    for (int i = 0; i < 200; ++i) {
        Vec a(24), b(24);
        for (auto& x : a) x = d(rng);
        for (auto& x : b) x = d(rng);
        CHECK(std::abs(cosine(a, b)) <= 1.0 + 1e-9);
    }
}

TEST_CASE("retrieve_dense: hand-built basis vectors") {
    VectorMap vectors;
    std::vector<RankedPassage> candidates;
    for (std::size_t i = 0; i < 5; ++i) {
        const std::string id = "c" + std::to_string(i + 1);
        vectors[id] = unit(5, i);
        candidates.push_back({id, 10.0 - static_cast<double>(i), Stage::Sparse});
    }
    Vec query{1.0f, 0.5f, 0.0f, 0.0f, 0.0f};

    // brute-force oracle over all five
    std::vector<std::pair<std::string, double>> expected;
    for (const auto& c : candidates) expected.emplace_back(c.chunk_id, cosine(query, vectors[c.chunk_id]));
    std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    const auto all = retrieve_dense(query, candidates, vectors, 100);
    REQUIRE(all.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(all[i].chunk_id == expected[i].first);
        CHECK(all[i].score == doctest::Approx(expected[i].second));
        CHECK(all[i].stage == Stage::Dense);
    }
    CHECK(all[0].chunk_id == "c1");
    CHECK(all[0].score == doctest::Approx(1.0 / std::sqrt(1.25)));
    CHECK(all[1].chunk_id == "c2");
    // zero-similarity candidates keep ascending-id order
    CHECK(all[2].chunk_id == "c3");
    CHECK(all[4].chunk_id == "c5");

    const auto top2 = retrieve_dense(query, candidates, vectors, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].chunk_id == "c1");
    CHECK(top2[1].chunk_id == "c2");
    CHECK(well_formed(top2));
}

TEST_CASE("retrieve_dense: subset invariant and errors") {
    VectorMap vectors{{"a", unit(4, 0)}, {"b", unit(4, 1)}};
    std::vector<RankedPassage> candidates{{"a", 1.0, Stage::Sparse}, {"b", 0.5, Stage::Sparse}};
    const auto out = retrieve_dense(unit(4, 0), candidates, vectors, 10);
    for (const auto& r : out) {
        CHECK((r.chunk_id == "a" || r.chunk_id == "b"));
    }

    candidates.push_back({"ghost", 0.1, Stage::Sparse});
    CHECK_THROWS_WITH_AS(retrieve_dense(unit(4, 0), candidates, vectors, 10),
                         doctest::Contains("ghost"), std::invalid_argument);
    candidates.pop_back();
    CHECK_THROWS_AS(retrieve_dense(unit(4, 0), candidates, vectors, 0), std::invalid_argument);
}

TEST_CASE("retrieve_dense: query scale leaves the order unchanged") {
    std::mt19937_64 rng(4242);
    std::normal_distribution<float> d(0.0f, 1.0f);
    VectorMap vectors;
    std::vector<RankedPassage> candidates;
    for (int i = 0; i < 40; ++i) {
        Vec v(16);
        for (auto& x : v) x = d(rng);
        const std::string id = "v" + std::to_string(i);
        vectors[id] = v;
        candidates.push_back({id, 1.0, Stage::Sparse});
    }
    Vec q(16);
    for (auto& x : q) x = d(rng);
    Vec q_scaled = q;
    for (auto& x : q_scaled) x *= 7.25f;

    const auto a = retrieve_dense(q, candidates, vectors, 40);
    const auto b = retrieve_dense(q_scaled, candidates, vectors, 40);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].chunk_id == b[i].chunk_id);
}

TEST_CASE("trigram embedder: determinism and self-similarity") {
    providers::HashedTrigramEmbedder embedder(768);
    CHECK(embedder.dimension() == 768);

    const std::string text = "الزكاه واجبه في مال المسلم";
    const auto v1 = embedder.embed_one(text);
    const auto v2 = embedder.embed_one(text);
    CHECK(v1 == v2);
    CHECK(cosine(v1, v2) == doctest::Approx(1.0).epsilon(1e-9));

    // unit norm
    double norm = 0.0;
    for (float x : v1) norm += static_cast<double>(x) * x;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));

    // short and empty texts
    CHECK(embedder.embed_one("اب") != Vec(768, 0.0f));
    CHECK(embedder.embed_one("") == Vec(768, 0.0f));

    // a query identical to one chunk's text ranks that chunk first with 1.0
    VectorMap vectors;
    std::vector<RankedPassage> candidates;
    const std::vector<std::string> texts = {text, "الصوم ركن من اركان الاسلام",
                                            "الحج الي بيت الله الحرام"};
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const std::string id = "t" + std::to_string(i);
        vectors[id] = embedder.embed_one(texts[i]);
        candidates.push_back({id, 1.0, Stage::Sparse});
    }
    const auto out = retrieve_dense(embedder.embed_one(text), candidates, vectors, 3);
    CHECK(out[0].chunk_id == "t0");
    CHECK(out[0].score == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("embed_corpus: batching arithmetic") {
    std::vector<corpus::Chunk> chunks;
    for (int i = 0; i < 20; ++i) {
        chunks.push_back(light_chunk("c" + std::to_string(i), "نص رقم " + std::to_string(i)));
    }
    CountingProvider provider;
    VectorCache cache;
    const auto vectors = embed_corpus(provider, chunks, cache);
    CHECK(vectors.size() == 20);
    CHECK(provider.batch_sizes == std::vector<std::size_t>{8, 8, 4});

    // warm cache: zero provider calls
    CountingProvider provider2;
    const auto again = embed_corpus(provider2, chunks, cache);
    CHECK(provider2.calls == 0);
    CHECK(again.size() == 20);
}

TEST_CASE("embed_corpus: cache keyed by content, not id") {
    std::vector<corpus::Chunk> chunks = {light_chunk("a", "نفس النص"),
                                         light_chunk("b", "نفس النص")};
    CountingProvider provider;
    VectorCache cache;
    const auto vectors = embed_corpus(provider, chunks, cache);
    CHECK(vectors.size() == 2);
    CHECK(provider.batch_sizes == std::vector<std::size_t>{1});  // one unique text
    CHECK(vectors.at("a") == vectors.at("b"));

    // editing one chunk re-embeds only that chunk
    std::vector<corpus::Chunk> edited = {light_chunk("a", "نفس النص"),
                                         light_chunk("b", "نص معدل")};
    CountingProvider provider3;
    embed_corpus(provider3, edited, cache);
    CHECK(provider3.batch_sizes == std::vector<std::size_t>{1});
}

TEST_CASE("embed_corpus: provider errors") {
    std::vector<corpus::Chunk> chunks;
    for (int i = 0; i < 12; ++i) {
        chunks.push_back(light_chunk("c" + std::to_string(i), "نص مختلف " + std::to_string(i)));
    }

    // wrong dimension
    WrongDimensionProvider wrong;
    VectorCache c1;
    CHECK_THROWS_WITH_AS(embed_corpus(wrong, chunks, c1), doctest::Contains("dimension"),
                         std::runtime_error);

    // transient failures are retried
    CountingProvider flaky(32, /*fail_first_calls=*/2);
    VectorCache c2;
    const auto vectors = embed_corpus(flaky, chunks, c2);
    CHECK(vectors.size() == 12);

    // persistent failure on the second batch: error names the batch, first
    // batch stays cached
    CountingProvider doomed(32, 0, /*fail_batch_index=*/1);
    VectorCache c3;
    CHECK_THROWS_WITH_AS(embed_corpus(doomed, chunks, c3), doctest::Contains("batch 1"),
                         std::runtime_error);
    CHECK(c3.size() == 8);
}

TEST_CASE("vector cache file round-trip and appending") {
    const auto dir = std::filesystem::temp_directory_path() / "bahith_dense_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "vectors.bin").string();
    std::filesystem::remove(path);

    providers::HashedTrigramEmbedder embedder(64);
    std::vector<corpus::Chunk> chunks;
    for (int i = 0; i < 10; ++i) {
        chunks.push_back(light_chunk("c" + std::to_string(i), "محتوي " + std::to_string(i)));
    }

    VectorCache cache;
    EmbedOptions opts;
    opts.batch_size = 4;
    opts.cache_path = path;
    const auto vectors = embed_corpus(embedder, chunks, cache, opts);

    const auto loaded = VectorCache::load(path);
    CHECK(loaded.provider_id() == embedder.id());
    CHECK(loaded.dimension() == 64);
    CHECK(loaded.size() == 10);
    for (const auto& c : chunks) {
        const Vec* v = loaded.find(content_hash(c.light));
        REQUIRE(v != nullptr);
        CHECK(*v == vectors.at(c.id));
    }

    // a second run touches neither provider nor file
    const auto before = std::filesystem::file_size(path);
    VectorCache cache2 = VectorCache::load(path);
    CountingProvider counting(64);
    embed_corpus(counting, chunks, cache2, opts);
    CHECK(counting.calls == 0);
    CHECK(std::filesystem::file_size(path) == before);

    // mismatched provider is rejected
    CHECK_THROWS_AS(CacheAppender(path, "someone-else", 64), std::runtime_error);
    providers::HashedTrigramEmbedder other(32);
    VectorCache cache3 = VectorCache::load(path);
    CHECK_THROWS_AS(embed_corpus(other, chunks, cache3), std::invalid_argument);

    // corrupt file detected
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "junk";
    }
    CHECK_THROWS_AS(VectorCache::load(path), std::runtime_error);
}

TEST_CASE("save/load of an in-memory cache is lossless") {
    const auto dir = std::filesystem::temp_directory_path() / "bahith_dense_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "snapshot.bin").string();

    VectorCache cache("prov", 3);
    cache.put(11, "a", Vec{1.0f, 2.0f, 3.0f});
    cache.put(22, "b", Vec{-1.0f, 0.5f, 0.0f});
    cache.save(path);
    const auto loaded = VectorCache::load(path);
    CHECK(loaded.size() == 2);
    REQUIRE(loaded.find(11) != nullptr);
    CHECK(*loaded.find(11) == Vec{1.0f, 2.0f, 3.0f});
    CHECK(loaded.ids().at(22) == "b");
}

TEST_CASE("embed_corpus rejects non-finite components") {
    class NanProvider final : public EmbeddingProvider {
    public:
        std::string id() const override { return "nan"; }
        std::size_t dimension() const override { return 4; }
        std::vector<Vec> embed(const std::vector<std::string>& texts) override {
            return std::vector<Vec>(texts.size(),
                                    Vec{1.0f, std::numeric_limits<float>::quiet_NaN(), 0.0f,
                                        0.0f});
        }
    };
    NanProvider provider;
    VectorCache cache;
    CHECK_THROWS_WITH_AS(embed_corpus(provider, {light_chunk("a", "نص")}, cache),
                         doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("embed_corpus uses the provider's preferred batch size by default") {
    class WideBatchProvider final : public EmbeddingProvider {
    public:
        std::string id() const override { return inner_.id(); }
        std::size_t dimension() const override { return inner_.dimension(); }
        std::size_t batch_size() const override { return 16; }
        std::vector<Vec> embed(const std::vector<std::string>& texts) override {
            batch_sizes.push_back(texts.size());
            return inner_.embed(texts);
        }
        std::vector<std::size_t> batch_sizes;

    private:
        providers::HashedTrigramEmbedder inner_{32};
    };
    std::vector<corpus::Chunk> chunks;
    for (int i = 0; i < 20; ++i) {
        chunks.push_back(light_chunk("c" + std::to_string(i), "نص " + std::to_string(i)));
    }
    WideBatchProvider provider;
    VectorCache cache;
    embed_corpus(provider, chunks, cache);
    CHECK(provider.batch_sizes == std::vector<std::size_t>{16, 4});
}
