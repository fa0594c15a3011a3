#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "bahith/sparse.hpp"
#include "support/fixtures.hpp"

using namespace bahith;
using namespace bahith::sparse;
using test::bare_chunk;

TEST_CASE("build_index: hand-countable postings") {
    const auto index = Bm25Index::build({bare_chunk("c1", {"a", "b", "a"})});
    CHECK(index.doc_count() == 1);
    CHECK(index.avg_doc_len() == doctest::Approx(3.0));
    CHECK(index.doc_len("c1") == 3);
    CHECK(index.term_count() == 2);

    const auto pa = index.postings("a");
    REQUIRE(pa.size() == 1);
    CHECK(pa[0].first == "c1");
    CHECK(pa[0].second == 2);
    const auto pb = index.postings("b");
    REQUIRE(pb.size() == 1);
    CHECK(pb[0].second == 1);
    CHECK(index.postings("zzz").empty());
}

TEST_CASE("build_index: average document length") {
    const auto index = Bm25Index::build(
        {bare_chunk("d1", {"a", "b", "c", "d"}), bare_chunk("d2", {"a", "b", "c", "d", "e", "f"})});
    CHECK(index.avg_doc_len() == doctest::Approx(5.0));
}

TEST_CASE("build_index: error cases") {
    CHECK_THROWS_AS(Bm25Index::build({}), std::invalid_argument);
    CHECK_THROWS_AS(Bm25Index::build({bare_chunk("c1", {})}), std::invalid_argument);
    CHECK_THROWS_AS(Bm25Index::build({bare_chunk("x", {"a"}), bare_chunk("x", {"b"})}),
                    std::invalid_argument);
    Bm25Params bad;
    bad.k1 = 0.0;
    CHECK_THROWS_AS(Bm25Index::build({bare_chunk("c1", {"a"})}, bad), std::invalid_argument);
    bad = {};
    bad.b = 1.5;
    CHECK_THROWS_AS(Bm25Index::build({bare_chunk("c1", {"a"})}, bad), std::invalid_argument);
}

TEST_CASE("idf stays non-negative when a term is everywhere") {
    // N = df = 2: ln((2-2+0.5)/(2+0.5) + 1) = ln(1.2)
    CHECK(bm25_idf(2, 2) == doctest::Approx(std::log(1.2)).epsilon(1e-12));
    CHECK(bm25_idf(2, 2) > 0.0);
    CHECK(bm25_idf(1000, 1000) > 0.0);
}

TEST_CASE("bm25_score: single-doc hand arithmetic") {
    const auto index = Bm25Index::build({bare_chunk("c1", {"x", "y"})});
    // idf = ln((1-1+0.5)/1.5 + 1) = ln(4/3); tf part = 2.2 / (1 + 1.2) = 1.0
    const double score = index.score({"x"}, "c1");
    CHECK(score == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
    CHECK(score == doctest::Approx(0.28768).epsilon(1e-4));

    CHECK(index.score({"absent"}, "c1") == 0.0);
    CHECK_THROWS_AS(index.score({"x"}, "nope"), std::invalid_argument);
}

TEST_CASE("bm25_score: tf saturation increases monotonically") {
    const auto once = Bm25Index::build({bare_chunk("d", {"x", "y"})});
    const auto twice = Bm25Index::build({bare_chunk("d", {"x", "x"})});
    CHECK(twice.score({"x"}, "d") > once.score({"x"}, "d"));
}

TEST_CASE("retrieve_sparse: the زكاة example") {
    // d1: tf 2, d2: tf 1 (equal lengths), d3: absent
    const std::vector<corpus::Chunk> chunks = {
        bare_chunk("d1", {"زكاة", "زكاة", "صدقه"}),
        bare_chunk("d2", {"زكاة", "مال", "صدقه"}),
        bare_chunk("d3", {"صوم", "رمضان", "هلال"}),
    };
    const auto index = Bm25Index::build(chunks);

    const auto top = index.retrieve({"زكاة"}, 1000);
    REQUIRE(top.size() == 2);  // d3 excluded: zero score
    CHECK(top[0].chunk_id == "d1");
    CHECK(top[1].chunk_id == "d2");
    CHECK(top[0].score > top[1].score);
    CHECK(top[0].stage == Stage::Sparse);

    // against the independent oracle
    std::vector<test::BruteDoc> docs;
    for (const auto& c : chunks) docs.push_back({c.id, c.full});
    const auto expected = test::brute_bm25(docs, {"زكاة"}, 1.2, 0.75, 1000);
    REQUIRE(expected.size() == top.size());
    for (std::size_t i = 0; i < top.size(); ++i) {
        CHECK(top[i].chunk_id == expected[i].first);
        CHECK(top[i].score == doctest::Approx(expected[i].second).epsilon(1e-12));
    }

    const auto top1 = index.retrieve({"زكاة"}, 1);
    REQUIRE(top1.size() == 1);
    CHECK(top1[0].chunk_id == "d1");
}

TEST_CASE("retrieve_sparse: degenerate queries") {
    const auto index = Bm25Index::build({bare_chunk("d1", {"a"})});
    CHECK(index.retrieve({}, 10).empty());
    CHECK(index.retrieve({"nothing", "matches"}, 10).empty());
    CHECK_THROWS_AS(index.retrieve({"a"}, 0), std::invalid_argument);
}

TEST_CASE("retrieve_sparse: ties break by ascending chunk id") {
    const auto index = Bm25Index::build(
        {bare_chunk("b", {"t", "u"}), bare_chunk("a", {"t", "v"}), bare_chunk("c", {"t", "w"})});
    const auto top = index.retrieve({"t"}, 10);
    REQUIRE(top.size() == 3);
    CHECK(top[0].chunk_id == "a");
    CHECK(top[1].chunk_id == "b");
    CHECK(top[2].chunk_id == "c");
    CHECK(top[0].score == top[1].score);
}

TEST_CASE("oracle equivalence on randomized corpora") {
    std::mt19937_64 rng(20250607);
    std::uniform_int_distribution<int> n_docs_dist(1, 50);
    std::uniform_int_distribution<int> doc_len_dist(1, 30);
    std::uniform_int_distribution<int> vocab_dist(0, 19);
    std::uniform_int_distribution<int> q_len_dist(1, 6);

    for (int round = 0; round < 200; ++round) {
        const int n_docs = n_docs_dist(rng);
        std::vector<corpus::Chunk> chunks;
        std::vector<test::BruteDoc> docs;
        for (int d = 0; d < n_docs; ++d) {
            std::vector<std::string> tokens;
            const int len = doc_len_dist(rng);
            for (int t = 0; t < len; ++t) tokens.push_back("w" + std::to_string(vocab_dist(rng)));
            char id[16];
            std::snprintf(id, sizeof id, "doc%03d", d);
            chunks.push_back(bare_chunk(id, tokens));
            docs.push_back({id, tokens});
        }
        std::vector<std::string> query;
        const int qlen = q_len_dist(rng);
        for (int t = 0; t < qlen; ++t) {
            // occasionally query an out-of-vocabulary term
            if (vocab_dist(rng) == 0) {
                query.push_back("oov");
            } else {
                query.push_back("w" + std::to_string(vocab_dist(rng)));
            }
        }
        std::uniform_int_distribution<std::size_t> n_dist(1, 60);
        const std::size_t n = n_dist(rng);

        const auto index = Bm25Index::build(chunks);
        const auto got = index.retrieve(query, n);
        const auto expected = test::brute_bm25(docs, query, 1.2, 0.75, n);

        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].chunk_id == expected[i].first);
        }
        CHECK(well_formed(got));
    }
}

TEST_CASE("index determinism and persistence round-trip") {
    std::vector<corpus::Chunk> chunks = {
        bare_chunk("alpha", {"الزكاه", "واجبه", "في", "المال"}),
        bare_chunk("beta", {"الصوم", "ركن", "من", "اركان", "الاسلام"}),
        bare_chunk("gamma", {"الزكاه", "الزكاه", "طهره"}),
    };
    const auto a = Bm25Index::build(chunks);
    const auto b = Bm25Index::build(chunks);
    CHECK(a.to_string() == b.to_string());

    const auto dir = std::filesystem::temp_directory_path() / "bahith_sparse_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "bm25.idx").string();
    a.save(path);
    const auto loaded = Bm25Index::load(path);
    CHECK(loaded.to_string() == a.to_string());
    CHECK(loaded.doc_count() == 3);
    CHECK(loaded.avg_doc_len() == doctest::Approx(4.0));
    CHECK(loaded.params().k1 == doctest::Approx(1.2));

    const auto q = loaded.retrieve({"الزكاه"}, 10);
    const auto q0 = a.retrieve({"الزكاه"}, 10);
    REQUIRE(q.size() == q0.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        CHECK(q[i].chunk_id == q0[i].chunk_id);
        CHECK(q[i].score == q0[i].score);
    }
}

TEST_CASE("index store rejects corruption") {
    const auto index = Bm25Index::build({bare_chunk("c1", {"a", "b"})});
    const std::string good = index.to_string();

    CHECK_THROWS_AS(Bm25Index::from_string("nonsense"), std::runtime_error);
    CHECK_THROWS_AS(Bm25Index::from_string(""), std::runtime_error);

    // tampered average must be caught
    std::string tampered = good;
    const auto pos = tampered.find("avg_doc_len=");
    tampered.replace(pos, std::string("avg_doc_len=2").size(), "avg_doc_len=9");
    CHECK_THROWS_WITH_AS(Bm25Index::from_string(tampered), doctest::Contains("avg_doc_len"),
                         std::runtime_error);

    // posting referencing an unknown ordinal
    std::string bad_posting = good + "P zz 7:1\n";
    CHECK_THROWS_AS(Bm25Index::from_string(bad_posting), std::runtime_error);
}

TEST_CASE("result lists satisfy the RankedPassage invariants") {
    CHECK(well_formed({}));
    CHECK(well_formed({{"a", 2.0, Stage::Sparse}, {"b", 1.0, Stage::Sparse}}));
    CHECK_FALSE(well_formed({{"a", 1.0, Stage::Sparse}, {"b", 2.0, Stage::Sparse}}));
    CHECK_FALSE(well_formed({{"a", 1.0, Stage::Sparse}, {"a", 1.0, Stage::Sparse}}));
}
