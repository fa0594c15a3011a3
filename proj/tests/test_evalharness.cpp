#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "bahith/evalharness.hpp"

using namespace bahith;
using namespace bahith::eval;

namespace {

Verdict verdict(const std::string& id, char gold, std::optional<char> predicted,
                rag::Difficulty level = rag::Difficulty::Unspecified) {
    Verdict v;
    v.item_id = id;
    v.gold = gold;
    v.predicted = predicted;
    v.correct = predicted.has_value() && *predicted == gold;
    v.difficulty = level;
    return v;
}

// n verdicts in one bucket with exactly `correct` right answers.
void fill_bucket(std::vector<Verdict>& out, rag::Difficulty level, std::size_t n,
                 std::size_t correct, const std::string& prefix) {
    for (std::size_t i = 0; i < n; ++i) {
        const bool right = i < correct;
        out.push_back(
            verdict(prefix + std::to_string(i), 'A', right ? 'A' : 'B', level));
    }
}

const std::string kDatasetFixture =
    R"({"id":"q1","question":"س1","options":{"A":"أ","B":"ب"},"answer":"A","level":"beginner"})"
    "\n"
    R"({"id":"q2","question":"س2","options":{"A":"أ","B":"ب","C":"ج"},"answer":"C"})"
    "\n"
    R"({"id":"q3","question":"س3","options":{"A":"أ","B":"ب"},"answer":"B","level":"advanced"})"
    "\n";

}  // namespace

TEST_CASE("load_dataset: happy path") {
    const auto items = parse_dataset(kDatasetFixture);
    REQUIRE(items.size() == 3);
    CHECK(items[0].id == "q1");
    CHECK(items[0].gold == 'A');
    CHECK(items[0].difficulty == rag::Difficulty::Beginner);
    CHECK(items[1].difficulty == rag::Difficulty::Unspecified);
    REQUIRE(items[1].options.size() == 3);
    CHECK(items[1].options[2].first == 'C');
}

TEST_CASE("load_dataset: error cases name the record") {
    // missing gold in labeled mode
    const std::string no_answer =
        R"({"id":"q1","question":"س","options":{"A":"أ","B":"ب"}})" "\n";
    CHECK_THROWS_WITH_AS(parse_dataset(no_answer, true), doctest::Contains("record 1"),
                         std::runtime_error);
    // same record acceptable in unlabeled mode
    CHECK(parse_dataset(no_answer, false).size() == 1);

    // missing required field
    const std::string no_question = R"({"id":"q1","options":{"A":"أ","B":"ب"},"answer":"A"})" "\n";
    CHECK_THROWS_WITH_AS(parse_dataset(no_question), doctest::Contains("question"),
                         std::runtime_error);

    // duplicate id names the id
    const std::string dup =
        R"({"id":"qX","question":"س","options":{"A":"أ","B":"ب"},"answer":"A"})" "\n"
        R"({"id":"qX","question":"س","options":{"A":"أ","B":"ب"},"answer":"B"})" "\n";
    CHECK_THROWS_WITH_AS(parse_dataset(dup), doctest::Contains("qX"), std::runtime_error);

    // malformed json
    CHECK_THROWS_AS(parse_dataset("{oops\n"), std::runtime_error);
    // gold letter outside options
    const std::string bad_gold =
        R"({"id":"q","question":"س","options":{"A":"أ","B":"ب"},"answer":"E"})" "\n";
    CHECK_THROWS_AS(parse_dataset(bad_gold), std::runtime_error);
}

TEST_CASE("evaluate: 8 of 10 correct") {
    std::vector<Verdict> verdicts;
    fill_bucket(verdicts, rag::Difficulty::Unspecified, 10, 8, "i");
    const auto report = evaluate(verdicts, "digest123");
    CHECK(report.total == 10);
    CHECK(report.correct == 8);
    CHECK(report.overall_accuracy == doctest::Approx(0.800));
    CHECK(report.invalid == 0);
    CHECK(report.config_digest == "digest123");
    REQUIRE(report.buckets.size() == 1);
    CHECK(report.buckets.at(rag::Difficulty::Unspecified).count == 10);
}

TEST_CASE("evaluate: all invalid predictions") {
    std::vector<Verdict> verdicts;
    for (int i = 0; i < 5; ++i) {
        verdicts.push_back(verdict("i" + std::to_string(i), 'A', std::nullopt));
    }
    const auto report = evaluate(verdicts);
    CHECK(report.overall_accuracy == 0.0);
    CHECK(report.invalid == 5);
    CHECK(report.correct == 0);
}

TEST_CASE("evaluate: empty set is an error") {
    CHECK_THROWS_AS(evaluate({}), std::invalid_argument);
}

TEST_CASE("evaluate: published per-level shape renders as expected") {
    // 700/150/150 split with 573/118/110 correct reproduces the published
    // 81.86 / 78.67 / 73.33 / 80.10 row used as a rendering fixture.
    std::vector<Verdict> verdicts;
    fill_bucket(verdicts, rag::Difficulty::Beginner, 700, 573, "b");
    fill_bucket(verdicts, rag::Difficulty::Intermediate, 150, 118, "i");
    fill_bucket(verdicts, rag::Difficulty::Advanced, 150, 110, "a");
    const auto report = evaluate(verdicts);

    CHECK(report.total == 1000);
    CHECK(report.correct == 801);
    CHECK(report.overall_accuracy == doctest::Approx(0.8010));

    const std::string rendered = render_report(report);
    CHECK(rendered.find("beginner 81.86% / intermediate 78.67% / advanced 73.33% / overall "
                        "80.10%") != std::string::npos);
    // empty buckets are omitted
    CHECK(rendered.find("unspecified") == std::string::npos);
}

TEST_CASE("evaluate: weighted consistency and permutation invariance") {
    std::mt19937_64 rng(2024);
    std::vector<Verdict> verdicts;
    const rag::Difficulty levels[] = {rag::Difficulty::Beginner, rag::Difficulty::Intermediate,
                                      rag::Difficulty::Advanced, rag::Difficulty::Unspecified};
    for (int i = 0; i < 500; ++i) {
        const auto level = levels[rng() % 4];
        const bool right = rng() % 3 != 0;
        const bool invalid = !right && rng() % 4 == 0;
        verdicts.push_back(verdict("i" + std::to_string(i), 'A',
                                   invalid ? std::optional<char>{}
                                           : std::optional<char>{right ? 'A' : 'B'},
                                   level));
    }
    const auto report = evaluate(verdicts);

    double weighted = 0.0;
    std::size_t counted = 0;
    for (const auto& [_, bucket] : report.buckets) {
        weighted += static_cast<double>(bucket.count) * bucket.accuracy;
        counted += bucket.count;
    }
    CHECK(counted == report.total);
    CHECK(report.overall_accuracy ==
          doctest::Approx(weighted / static_cast<double>(report.total)).epsilon(1e-9));
    for (const auto& [_, bucket] : report.buckets) {
        CHECK(bucket.accuracy >= 0.0);
        CHECK(bucket.accuracy <= 1.0);
    }

    auto shuffled = verdicts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto report2 = evaluate(shuffled);
    CHECK(report2.overall_accuracy == report.overall_accuracy);
    CHECK(report2.correct == report.correct);
    CHECK(report2.invalid == report.invalid);
    REQUIRE(report2.buckets.size() == report.buckets.size());
    for (const auto& [level, bucket] : report.buckets) {
        CHECK(report2.buckets.at(level).count == bucket.count);
        CHECK(report2.buckets.at(level).accuracy == bucket.accuracy);
    }
}

TEST_CASE("compare_runs: identical runs are all zero") {
    std::vector<Verdict> verdicts;
    fill_bucket(verdicts, rag::Difficulty::Beginner, 10, 7, "b");
    const auto report = evaluate(verdicts);
    const auto summary = compare_runs(report, report);
    CHECK(summary.overall_delta == 0.0);
    CHECK(summary.fixed.empty());
    CHECK(summary.broken.empty());
    for (const auto& [_, delta] : summary.bucket_delta) CHECK(delta == 0.0);
}

TEST_CASE("compare_runs: one flipped item in ten moves its bucket by 0.1") {
    std::vector<Verdict> a, b;
    fill_bucket(a, rag::Difficulty::Beginner, 10, 5, "x");
    fill_bucket(b, rag::Difficulty::Beginner, 10, 6, "x");
    const auto summary = compare_runs(evaluate(a), evaluate(b));
    CHECK(summary.overall_delta == doctest::Approx(0.1));
    CHECK(summary.bucket_delta.at(rag::Difficulty::Beginner) == doctest::Approx(0.1));
    REQUIRE(summary.fixed.size() == 1);
    CHECK(summary.fixed[0] == "x5");
    CHECK(summary.broken.empty());

    const auto reversed = compare_runs(evaluate(b), evaluate(a));
    CHECK(reversed.overall_delta == doctest::Approx(-0.1));
    CHECK(reversed.broken.size() == 1);
}

TEST_CASE("compare_runs: the 55 -> 80 published delta is +25 points") {
    std::vector<Verdict> baseline, rag_run;
    fill_bucket(baseline, rag::Difficulty::Unspecified, 20, 11, "q");  // 55.0%
    fill_bucket(rag_run, rag::Difficulty::Unspecified, 20, 16, "q");   // 80.0%
    const auto a = evaluate(baseline);
    const auto b = evaluate(rag_run);
    CHECK(a.overall_accuracy == doctest::Approx(0.55));
    CHECK(b.overall_accuracy == doctest::Approx(0.80));

    const auto summary = compare_runs(a, b);
    CHECK(summary.overall_delta * 100.0 == doctest::Approx(25.0).epsilon(1e-9));
    CHECK(render_compare(summary).find("+25.0 points") != std::string::npos);
}

TEST_CASE("compare_runs: mismatched item sets are rejected") {
    std::vector<Verdict> a, b;
    fill_bucket(a, rag::Difficulty::Beginner, 5, 3, "x");
    fill_bucket(b, rag::Difficulty::Beginner, 5, 3, "y");
    CHECK_THROWS_AS(compare_runs(evaluate(a), evaluate(b)), std::invalid_argument);

    std::vector<Verdict> c = a;
    c.push_back(verdict("extra", 'A', 'A', rag::Difficulty::Beginner));
    CHECK_THROWS_AS(compare_runs(evaluate(a), evaluate(c)), std::invalid_argument);
}

TEST_CASE("report file round-trip") {
    std::vector<Verdict> verdicts;
    fill_bucket(verdicts, rag::Difficulty::Beginner, 6, 4, "b");
    fill_bucket(verdicts, rag::Difficulty::Advanced, 4, 1, "a");
    verdicts.push_back(verdict("inv", 'A', std::nullopt, rag::Difficulty::Advanced));
    const auto report = evaluate(verdicts, "cfg-xyz");

    const auto dir = std::filesystem::temp_directory_path() / "bahith_eval_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "report.json").string();
    save_report(report, path);
    const auto loaded = load_report(path);

    CHECK(loaded.total == report.total);
    CHECK(loaded.correct == report.correct);
    CHECK(loaded.invalid == report.invalid);
    CHECK(loaded.overall_accuracy == report.overall_accuracy);
    CHECK(loaded.config_digest == "cfg-xyz");
    REQUIRE(loaded.verdicts.size() == report.verdicts.size());
    for (std::size_t i = 0; i < loaded.verdicts.size(); ++i) {
        CHECK(loaded.verdicts[i].item_id == report.verdicts[i].item_id);
        CHECK(loaded.verdicts[i].correct == report.verdicts[i].correct);
        CHECK(loaded.verdicts[i].predicted == report.verdicts[i].predicted);
    }
    CHECK(report_to_json(loaded) == report_to_json(report));

    CHECK_THROWS_AS(report_from_json("{}"), std::runtime_error);
    CHECK_THROWS_AS(report_from_json("no"), std::runtime_error);

    // compare_runs over files reproduces the in-memory summary
    const auto summary = compare_runs(loaded, loaded);
    CHECK(summary.overall_delta == 0.0);
}

TEST_CASE("make_verdict ties correctness to the gold letter") {
    rag::McqItem item;
    item.id = "v";
    item.question = "س";
    item.options = {{'A', "a"}, {'B', "b"}};
    item.gold = 'B';
    CHECK(make_verdict(item, 'B').correct);
    CHECK_FALSE(make_verdict(item, 'A').correct);
    CHECK_FALSE(make_verdict(item, std::nullopt).correct);

    item.gold.reset();
    CHECK_THROWS_AS(make_verdict(item, 'A'), std::invalid_argument);
}
