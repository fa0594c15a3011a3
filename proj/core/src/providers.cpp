#include "bahith/providers.hpp"

#include <cmath>
#include <unordered_set>

#include "bahith/utf8.hpp"

namespace bahith::providers {

// ---------------------------------------------------------------------------
// HashedTrigramEmbedder
// ---------------------------------------------------------------------------

dense::Vec HashedTrigramEmbedder::embed_one(const std::string& text) {
    dense::Vec v(dimension_, 0.0f);
    const auto cps = utf8::decode(text);
    auto bump = [&](std::string_view gram) {
        v[dense::content_hash(gram) % dimension_] += 1.0f;
    };
    if (cps.size() >= 3) {
        for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
            std::string gram;
            for (std::size_t k = i; k < i + 3; ++k) utf8::append(gram, cps[k].cp);
            bump(gram);
        }
    } else if (!cps.empty()) {
        bump(text);
    }
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    if (norm > 0.0) {
        const auto inv = static_cast<float>(1.0 / std::sqrt(norm));
        for (float& x : v) x *= inv;
    }
    return v;
}

std::vector<dense::Vec> HashedTrigramEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<dense::Vec> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

// ---------------------------------------------------------------------------
// TokenOverlapScorer
// ---------------------------------------------------------------------------

namespace {

std::unordered_set<std::string_view> unique_ws_tokens(const std::string& s) {
    std::unordered_set<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ') ++i;
        if (i > start) out.insert(std::string_view(s).substr(start, i - start));
    }
    return out;
}

}  // namespace

double TokenOverlapScorer::overlap(const std::string& query, const std::string& passage) {
    const auto q = unique_ws_tokens(query);
    if (q.empty()) return 0.0;
    const auto p = unique_ws_tokens(passage);
    std::size_t shared = 0;
    for (const auto& tok : q) {
        if (p.count(tok) > 0) ++shared;
    }
    return static_cast<double>(shared) / static_cast<double>(q.size());
}

std::vector<double> TokenOverlapScorer::score_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& [q, p] : pairs) out.push_back(overlap(q, p));
    return out;
}

// ---------------------------------------------------------------------------
// Stub LLMs
// ---------------------------------------------------------------------------

std::string FixedAnswerLlm::complete(const std::string&, const rag::LlmOptions&) {
    return std::string(1, letter_);
}

std::string ContextEchoLlm::complete(const std::string& prompt, const rag::LlmOptions&) {
    // The item's sections come after any few-shot examples, so search from
    // the end of the prompt.
    const std::size_t qpos = prompt.rfind(rag::kQuestionHeader);
    const std::size_t cpos = prompt.rfind(rag::kChoicesHeader);
    if (qpos == std::string::npos || cpos == std::string::npos || cpos < qpos) {
        return "A";
    }

    // Options: lines of the form "X) text" after the choices header.
    std::vector<std::pair<char, std::string>> options;
    std::size_t pos = prompt.find('\n', cpos);
    while (pos != std::string::npos && pos + 1 < prompt.size()) {
        const std::size_t line_start = pos + 1;
        std::size_t line_end = prompt.find('\n', line_start);
        if (line_end == std::string::npos) line_end = prompt.size();
        std::string_view line(prompt.data() + line_start, line_end - line_start);
        if (line.size() >= 3 && line[0] >= 'A' && line[0] <= 'F' && line[1] == ')' &&
            line[2] == ' ') {
            options.emplace_back(line[0], std::string(line.substr(3)));
            pos = line_end;
        } else {
            break;
        }
    }
    if (options.empty()) return "A";

    // Context block: between the reference header and the question.
    const std::size_t ctx_begin = prompt.rfind(rag::kContextHeader, qpos);
    std::string_view context;
    if (ctx_begin != std::string::npos && ctx_begin < qpos) {
        context = std::string_view(prompt.data() + ctx_begin, qpos - ctx_begin);
    }

    char best = options.front().first;
    std::size_t best_len = 0;
    for (const auto& [letter, text] : options) {
        if (!context.empty() && !text.empty() && context.find(text) != std::string_view::npos &&
            text.size() > best_len) {
            best = letter;
            best_len = text.size();
        }
    }
    return std::string(1, best);
}

}  // namespace bahith::providers
