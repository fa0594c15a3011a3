#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles stay
// deliberately naive: they re-derive expected results from first principles
// so they cannot share bugs with the implementation.

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "bahith/corpus.hpp"
#include "bahith/ragflow.hpp"

namespace bahith::test {

// ---------------------------------------------------------------------------
// Random text generator for normalization property tests
// ---------------------------------------------------------------------------

class TextGen {
public:
    explicit TextGen(uint64_t seed) : rng_(seed) {}

    std::string next(std::size_t max_len = 60) {
        static const std::vector<std::string> pool = {
            // Arabic letters
            "ا", "ب", "ت", "ث", "ج", "ح", "خ", "د", "ر", "ز", "س", "ش", "ص", "ع", "غ",
            "ف", "ق", "ك", "ل", "م", "ن", "ه", "و", "ي", "أ", "إ", "آ", "ة", "ى", "ء",
            "ؤ", "ئ", "ٱ",
            // diacritics
            "ً", "ٌ", "ٍ", "َ", "ُ", "ِ", "ّ", "ْ",
            "ٰ",
            // punctuation
            ".", ",", "!", "?", "،", "؛", "؟", "(", ")", "[", "]", "\"", "'", "«", "»", "-",
            ":", "…",
            // latin and digits
            "a", "b", "c", "X", "Y", "z", "0", "7", "9", "٣", "٥",
            // whitespace and format characters
            " ", " ", " ", "\t", "\n", " ", "​", "‌", "﻿",
            // tatweel
            "ـ",
        };
        std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        std::string out;
        const std::size_t len = len_dist(rng_);
        for (std::size_t i = 0; i < len; ++i) out += pool[pick(rng_)];
        return out;
    }

private:
    std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Brute-force BM25 oracle
// ---------------------------------------------------------------------------

struct BruteDoc {
    std::string id;
    std::vector<std::string> tokens;
};

// Scores every document directly from the Okapi formula; returns (id, score)
// sorted by score descending, ties by ascending id, zero scores dropped,
// truncated to n.
inline std::vector<std::pair<std::string, double>> brute_bm25(
    const std::vector<BruteDoc>& docs, const std::vector<std::string>& query, double k1,
    double b, std::size_t n) {
    const double N = static_cast<double>(docs.size());
    double total_len = 0;
    for (const auto& d : docs) total_len += static_cast<double>(d.tokens.size());
    const double avg = total_len / N;

    std::map<std::string, std::size_t> df;
    for (const auto& d : docs) {
        std::map<std::string, bool> seen;
        for (const auto& t : d.tokens) {
            if (!seen[t]) {
                seen[t] = true;
                ++df[t];
            }
        }
    }

    std::vector<std::pair<std::string, double>> scored;
    for (const auto& d : docs) {
        double score = 0.0;
        for (const auto& q : query) {
            std::size_t tf = 0;
            for (const auto& t : d.tokens) {
                if (t == q) ++tf;
            }
            if (tf == 0) continue;
            const double idf =
                std::log((N - static_cast<double>(df[q]) + 0.5) /
                             (static_cast<double>(df[q]) + 0.5) +
                         1.0);
            const double tfd = static_cast<double>(tf);
            const double denom =
                tfd + k1 * (1.0 - b + b * (static_cast<double>(d.tokens.size()) / avg));
            score += idf * (tfd * (k1 + 1.0)) / denom;
        }
        if (score > 0.0) scored.emplace_back(d.id, score);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    if (scored.size() > n) scored.resize(n);
    return scored;
}

// Chunk carrying only what the index needs.
inline corpus::Chunk bare_chunk(std::string id, std::vector<std::string> full) {
    corpus::Chunk c;
    c.id = std::move(id);
    c.source_id = c.id;
    c.full = std::move(full);
    c.token_count = static_cast<uint32_t>(c.full.size());
    return c;
}

// ---------------------------------------------------------------------------
// Planted-answer fixture: each question's answer sentence exists in exactly
// one chunk, so retrieval containment and the rag-vs-baseline uplift are
// decidable by construction.
// ---------------------------------------------------------------------------

struct PlantedFixture {
    std::vector<corpus::FatwaRecord> records;
    std::vector<rag::McqItem> items;
    std::map<std::string, std::string> gold_chunk_of_item;  // item id -> chunk id
};

inline PlantedFixture make_planted_fixture(std::size_t n_items, std::size_t n_distractors) {
    PlantedFixture fx;
    const char letters[] = {'A', 'B', 'C', 'D'};
    for (std::size_t i = 0; i < n_items; ++i) {
        const std::string key = "مفتاح" + std::to_string(100 + i);
        const std::string correct =
            "القول المعتمد رقم " + std::to_string(100 + i) + " عند الجمهور";
        const char gold = letters[i % 4];

        corpus::FatwaRecord rec;
        rec.category = "فقه";
        rec.question = "سؤال عن مسألة " + key + " في الفقه";
        rec.answer = "الجواب في مسألة " + key + " أن " + correct + " كما هو مقرر";
        rec.metadata["id"] = "planted-" + std::to_string(i);
        fx.records.push_back(rec);

        rag::McqItem item;
        item.id = "q" + std::to_string(i);
        item.question = "ما الحكم في مسألة " + key + " عند الفقهاء";
        for (std::size_t o = 0; o < 4; ++o) {
            const char letter = letters[o];
            if (letter == gold) {
                item.options.emplace_back(letter, correct);
            } else {
                item.options.emplace_back(letter, "قول مهجور " + std::to_string(100 + i) + " " +
                                                      std::string(1, letter) + " لا يعتد به");
            }
        }
        item.gold = gold;
        item.difficulty = i % 3 == 0   ? rag::Difficulty::Beginner
                          : i % 3 == 1 ? rag::Difficulty::Intermediate
                                       : rag::Difficulty::Advanced;
        fx.items.push_back(item);
        fx.gold_chunk_of_item[item.id] = "planted-" + std::to_string(i) + ":0";
    }
    for (std::size_t d = 0; d < n_distractors; ++d) {
        corpus::FatwaRecord rec;
        rec.category = "عام";
        rec.question = "سؤال عام في الفقه رقم " + std::to_string(d) + " عن مسألة مشهورة";
        rec.answer = "جواب عام يذكر الحكم والدليل في مسألة من المسائل رقم " + std::to_string(d);
        rec.metadata["id"] = "filler-" + std::to_string(d);
        fx.records.push_back(rec);
    }
    return fx;
}

}  // namespace bahith::test
