#include "bahith/http_providers.hpp"

#include <cstdlib>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace bahith::providers {

namespace {

using nlohmann::json;

json post_json(const std::string& base_url, const std::string& path, const json& body,
               const HttpOptions& opts) {
    httplib::Client client(base_url);
    client.set_connection_timeout(opts.timeout_seconds, 0);
    client.set_read_timeout(opts.timeout_seconds, 0);
    client.set_write_timeout(opts.timeout_seconds, 0);

    httplib::Headers headers;
    if (!opts.token_env.empty()) {
        if (const char* token = std::getenv(opts.token_env.c_str()); token && *token) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }

    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
        throw std::runtime_error("http: no response from " + base_url + path + " (" +
                                 httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
        throw std::runtime_error("http: " + base_url + path + " returned status " +
                                 std::to_string(res->status));
    }
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw std::runtime_error("http: bad JSON from " + base_url + path + ": " + e.what());
    }
}

}  // namespace

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url, std::size_t dimension,
                                             HttpOptions opts)
    : base_url_(std::move(base_url)), dimension_(dimension), opts_(std::move(opts)) {}

std::vector<dense::Vec> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    const json reply = post_json(base_url_, "/embed", json{{"texts", texts}}, opts_);
    std::vector<dense::Vec> out;
    try {
        out = reply.at("vectors").get<std::vector<dense::Vec>>();
    } catch (const json::exception& e) {
        throw std::runtime_error("embed endpoint: malformed response: " + std::string(e.what()));
    }
    return out;
}

HttpPairScorer::HttpPairScorer(std::string base_url, HttpOptions opts)
    : base_url_(std::move(base_url)), opts_(std::move(opts)) {}

std::vector<double> HttpPairScorer::score_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    json jpairs = json::array();
    for (const auto& [q, p] : pairs) jpairs.push_back(json::array({q, p}));
    const json reply = post_json(base_url_, "/score", json{{"pairs", jpairs}}, opts_);
    try {
        return reply.at("scores").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw std::runtime_error("scorer endpoint: malformed response: " + std::string(e.what()));
    }
}

HttpLlmProvider::HttpLlmProvider(std::string base_url, std::string model, HttpOptions opts)
    : base_url_(std::move(base_url)), model_(std::move(model)), opts_(std::move(opts)) {}

std::string HttpLlmProvider::complete(const std::string& prompt, const rag::LlmOptions& opts) {
    const json body{{"model", model_},
                    {"prompt", prompt},
                    {"temperature", opts.temperature},
                    {"max_tokens", opts.max_tokens}};
    const json reply = post_json(base_url_, "/complete", body, opts_);
    try {
        return reply.at("text").get<std::string>();
    } catch (const json::exception& e) {
        throw std::runtime_error("llm endpoint: malformed response: " + std::string(e.what()));
    }
}

}  // namespace bahith::providers
