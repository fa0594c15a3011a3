#pragma once

// MCQ evaluation: dataset loading, exact-match accuracy overall and per
// difficulty level, and run-to-run comparison.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bahith/ragflow.hpp"

namespace bahith::eval {

struct Verdict {
    std::string item_id;
    std::optional<char> predicted;  // nullopt = invalid (unparseable response)
    char gold = 'A';
    bool correct = false;  // predicted == gold; invalid is never correct
    rag::Difficulty difficulty = rag::Difficulty::Unspecified;
};

Verdict make_verdict(const rag::McqItem& item, std::optional<char> predicted);

struct BucketStats {
    std::size_t count = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
};

struct EvalReport {
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t invalid = 0;
    double overall_accuracy = 0.0;
    std::map<rag::Difficulty, BucketStats> buckets;  // levels absent from data are omitted
    std::string config_digest;
    std::vector<Verdict> verdicts;
};

// Dataset: one JSON object per line with fields `id`, `question`, `options`
// (letter -> text map), `answer` and optional `level`. Throws with the record
// number on a missing field and names duplicate ids. `require_gold` makes a
// missing answer an error (labeled mode).
std::vector<rag::McqItem> parse_dataset(std::string_view text, bool require_gold = true);
std::vector<rag::McqItem> load_dataset(const std::string& path, bool require_gold = true);

// Aggregates verdicts; every verdict needs a gold label (callers build them
// with make_verdict). Throws std::invalid_argument on an empty set.
EvalReport evaluate(const std::vector<Verdict>& verdicts, std::string config_digest = "");

struct CompareSummary {
    double overall_delta = 0.0;  // accuracy(b) - accuracy(a), as a fraction
    std::map<rag::Difficulty, double> bucket_delta;
    std::vector<std::string> fixed;   // wrong in a, right in b
    std::vector<std::string> broken;  // right in a, wrong in b
};

// Both reports must cover the same item ids. a is conventionally the
// baseline, b the candidate.
CompareSummary compare_runs(const EvalReport& a, const EvalReport& b);

// Human-readable table; per-level accuracies appear on one summary row.
std::string render_report(const EvalReport& report);
std::string render_compare(const CompareSummary& summary);

// Machine-readable report file mirroring the EvalReport fields.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view text);
void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);

}  // namespace bahith::eval
