#pragma once

// Deterministic offline providers. These back `--stub-providers` runs and the
// test suites; the real embedding / cross-encoder / LLM endpoints are drop-in
// replacements behind the same interfaces.

#include <string>
#include <vector>

#include "bahith/dense.hpp"
#include "bahith/ragflow.hpp"
#include "bahith/rerank.hpp"

namespace bahith::providers {

// Embeds text as the L2-normalized hashed character-trigram count vector.
// Identical text always embeds identically, so self-similarity is exactly 1.
class HashedTrigramEmbedder final : public dense::EmbeddingProvider {
public:
    explicit HashedTrigramEmbedder(std::size_t dimension = 768) : dimension_(dimension) {}

    std::string id() const override {
        return "hashed-trigram-" + std::to_string(dimension_);
    }
    std::size_t dimension() const override { return dimension_; }
    std::vector<dense::Vec> embed(const std::vector<std::string>& texts) override;

    // Single-text convenience used by tests.
    dense::Vec embed_one(const std::string& text);

private:
    std::size_t dimension_;
};

// Scores a pair as |unique query tokens ∩ unique passage tokens| divided by
// |unique query tokens| (whitespace tokens of the light texts).
class TokenOverlapScorer final : public rerank::PairScorer {
public:
    std::string id() const override { return "token-overlap"; }
    std::vector<double> score_pairs(
        const std::vector<std::pair<std::string, std::string>>& pairs) override;

    static double overlap(const std::string& query, const std::string& passage);
};

// Always answers the same letter; handy for wiring tests.
class FixedAnswerLlm final : public rag::LlmProvider {
public:
    explicit FixedAnswerLlm(char letter = 'A') : letter_(letter) {}
    std::string id() const override { return std::string("fixed-") + letter_; }
    std::string complete(const std::string& prompt, const rag::LlmOptions& opts) override;

private:
    char letter_;
};

// Reads the rendered prompt and answers the option whose text occurs in the
// reference-context block; several matches pick the longest option text, and
// no context or no match falls back to the first option. Understands the
// default prompt scaffold's section headers.
class ContextEchoLlm final : public rag::LlmProvider {
public:
    std::string id() const override { return "context-echo"; }
    std::string complete(const std::string& prompt, const rag::LlmOptions& opts) override;
};

}  // namespace bahith::providers
