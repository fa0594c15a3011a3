#pragma once

// HTTP-backed providers speaking the documented wire contracts:
//
//   POST /embed     {"texts": [...]}                  -> {"vectors": [[...], ...]}
//   POST /score     {"pairs": [[q, p], ...]}          -> {"scores": [...]}
//   POST /complete  {"model", "prompt",
//                    "temperature", "max_tokens"}     -> {"text": "..."}
//
// Auth tokens come only from environment variables, never from flags or
// config files.

#include <string>
#include <vector>

#include "bahith/dense.hpp"
#include "bahith/ragflow.hpp"
#include "bahith/rerank.hpp"

namespace bahith::providers {

struct HttpOptions {
    int timeout_seconds = 60;
    std::string token_env;  // name of the env var holding the bearer token
};

class HttpEmbeddingProvider final : public dense::EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::string base_url, std::size_t dimension, HttpOptions opts = {});

    std::string id() const override { return "http-embed:" + base_url_; }
    std::size_t dimension() const override { return dimension_; }
    std::vector<dense::Vec> embed(const std::vector<std::string>& texts) override;

private:
    std::string base_url_;
    std::size_t dimension_;
    HttpOptions opts_;
};

class HttpPairScorer final : public rerank::PairScorer {
public:
    explicit HttpPairScorer(std::string base_url, HttpOptions opts = {});

    std::string id() const override { return "http-scorer:" + base_url_; }
    std::vector<double> score_pairs(
        const std::vector<std::pair<std::string, std::string>>& pairs) override;

private:
    std::string base_url_;
    HttpOptions opts_;
};

class HttpLlmProvider final : public rag::LlmProvider {
public:
    HttpLlmProvider(std::string base_url, std::string model, HttpOptions opts = {});

    std::string id() const override { return "http-llm:" + base_url_ + "#" + model_; }
    std::string complete(const std::string& prompt, const rag::LlmOptions& opts) override;

private:
    std::string base_url_;
    std::string model_;
    HttpOptions opts_;
};

}  // namespace bahith::providers
