#pragma once

// Stage 3 of the cascade: a pluggable cross-encoder scores (query, passage)
// pairs and the top-k passages feed the prompt context.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bahith/ranked.hpp"

namespace bahith::rerank {

class PairScorer {
public:
    virtual ~PairScorer() = default;

    virtual std::string id() const = 0;

    // Probabilistic providers sharpen their scores by this before logging;
    // a monotone transform, so rankings never change.
    virtual double temperature() const { return 0.1; }

    // One finite score per (query, passage) pair. Throws on failure.
    virtual std::vector<double> score_pairs(
        const std::vector<std::pair<std::string, std::string>>& pairs) = 0;
};

struct RerankOptions {
    int max_attempts = 3;
};

// Resolves a chunk id to its lightly processed text.
using PassageTextFn = std::function<std::string(const std::string& chunk_id)>;

// Scores every candidate once against the light query text and returns the
// top-k, non-increasing, ties by ascending chunk id. Scoring failures are
// retried up to max_attempts; a batch that keeps failing is re-scored pair by
// pair so the error names the offending pair.
std::vector<RankedPassage> rerank(PairScorer& scorer, const std::string& query_light,
                                  const std::vector<RankedPassage>& candidates,
                                  const PassageTextFn& passage_light, std::size_t k,
                                  const RerankOptions& opts = {});

// Scores divided by temperature; order is unchanged (monotone). Throws
// std::invalid_argument when temperature <= 0.
std::vector<double> apply_temperature(const std::vector<double>& raw_scores, double temperature);

}  // namespace bahith::rerank
