#include "bahith/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bahith::rerank {

namespace {

std::vector<double> score_with_retry(PairScorer& scorer,
                                     const std::vector<std::pair<std::string, std::string>>& pairs,
                                     int max_attempts) {
    std::string last_error;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        try {
            auto scores = scorer.score_pairs(pairs);
            if (scores.size() != pairs.size()) {
                throw std::runtime_error("scorer returned " + std::to_string(scores.size()) +
                                         " scores for " + std::to_string(pairs.size()) +
                                         " pairs");
            }
            for (double s : scores) {
                if (!std::isfinite(s)) throw std::runtime_error("scorer returned a non-finite score");
            }
            return scores;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    throw std::runtime_error(last_error);
}

}  // namespace

std::vector<RankedPassage> rerank(PairScorer& scorer, const std::string& query_light,
                                  const std::vector<RankedPassage>& candidates,
                                  const PassageTextFn& passage_light, std::size_t k,
                                  const RerankOptions& opts) {
    if (candidates.empty()) throw std::invalid_argument("rerank: candidates must be non-empty");
    if (k == 0) throw std::invalid_argument("rerank: k must be >= 1");

    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(candidates.size());
    for (const auto& cand : candidates) pairs.emplace_back(query_light, passage_light(cand.chunk_id));

    std::vector<double> scores;
    try {
        scores = score_with_retry(scorer, pairs, opts.max_attempts);
    } catch (const std::exception& batch_error) {
        // Isolate the failing pair so the error names it.
        scores.reserve(pairs.size());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            try {
                auto one = score_with_retry(scorer, {pairs[i]}, opts.max_attempts);
                scores.push_back(one[0]);
            } catch (const std::exception& e) {
                throw std::runtime_error("rerank: scorer failed for pair (query, chunk '" +
                                         candidates[i].chunk_id + "') after " +
                                         std::to_string(opts.max_attempts) +
                                         " attempts: " + e.what());
            }
        }
        (void)batch_error;
    }

    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return candidates[a].chunk_id < candidates[b].chunk_id;
    });
    if (order.size() > k) order.resize(k);

    std::vector<RankedPassage> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back({candidates[i].chunk_id, scores[i], Stage::Rerank});
    return out;
}

std::vector<double> apply_temperature(const std::vector<double>& raw_scores, double temperature) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("apply_temperature: temperature must be > 0");
    }
    std::vector<double> out;
    out.reserve(raw_scores.size());
    for (double s : raw_scores) out.push_back(s / temperature);
    return out;
}

}  // namespace bahith::rerank
