#include "bahith/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace bahith {

const char* to_string(Stage stage) {
    switch (stage) {
        case Stage::Sparse:
            return "sparse";
        case Stage::Dense:
            return "dense";
        case Stage::Rerank:
            return "rerank";
    }
    return "?";
}

bool well_formed(const std::vector<RankedPassage>& list) {
    std::unordered_set<std::string_view> seen;
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (i > 0 && list[i].score > list[i - 1].score) return false;
        if (!seen.insert(list[i].chunk_id).second) return false;
    }
    return true;
}

}  // namespace bahith

namespace bahith::sparse {

void Bm25Params::validate() const {
    if (!(k1 > 0.0)) throw std::invalid_argument("bm25: k1 must be > 0");
    if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("bm25: b must be in [0, 1]");
}

double bm25_idf(std::size_t doc_count, std::size_t doc_freq) {
    const double n = static_cast<double>(doc_count);
    const double df = static_cast<double>(doc_freq);
    return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

Bm25Index Bm25Index::build(const std::vector<corpus::Chunk>& chunks, Bm25Params params) {
    params.validate();

    Bm25Index index;
    index.params_ = params;
    index.doc_ids_.reserve(chunks.size());
    for (const auto& c : chunks) index.doc_ids_.push_back(c.id);
    std::sort(index.doc_ids_.begin(), index.doc_ids_.end());
    if (std::adjacent_find(index.doc_ids_.begin(), index.doc_ids_.end()) !=
        index.doc_ids_.end()) {
        throw std::invalid_argument("bm25: duplicate chunk ids");
    }

    std::unordered_map<std::string_view, uint32_t> ordinal;
    ordinal.reserve(index.doc_ids_.size());
    for (uint32_t i = 0; i < index.doc_ids_.size(); ++i) ordinal.emplace(index.doc_ids_[i], i);

    index.doc_lens_.assign(index.doc_ids_.size(), 0);
    uint64_t total_len = 0;
    for (const auto& c : chunks) {
        const uint32_t ord = ordinal.at(c.id);
        index.doc_lens_[ord] = static_cast<uint32_t>(c.full.size());
        total_len += c.full.size();

        std::map<std::string_view, uint32_t> tf;
        for (const auto& tok : c.full) ++tf[tok];
        for (const auto& [term, freq] : tf) {
            index.postings_[std::string(term)].push_back({ord, freq});
        }
    }
    if (total_len == 0) {
        throw std::invalid_argument("bm25: corpus has no tokens (average length undefined)");
    }
    for (auto& [term, plist] : index.postings_) {
        std::sort(plist.begin(), plist.end(),
                  [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
    }
    index.avg_doc_len_ =
        static_cast<double>(total_len) / static_cast<double>(index.doc_ids_.size());
    return index;
}

std::size_t Bm25Index::ordinal_of(const std::string& chunk_id) const {
    auto it = std::lower_bound(doc_ids_.begin(), doc_ids_.end(), chunk_id);
    if (it == doc_ids_.end() || *it != chunk_id) {
        throw std::invalid_argument("bm25: unknown chunk id '" + chunk_id + "'");
    }
    return static_cast<std::size_t>(it - doc_ids_.begin());
}

uint32_t Bm25Index::doc_len(const std::string& chunk_id) const {
    return doc_lens_[ordinal_of(chunk_id)];
}

std::vector<std::pair<std::string, uint32_t>> Bm25Index::postings(const std::string& term) const {
    std::vector<std::pair<std::string, uint32_t>> out;
    auto it = postings_.find(term);
    if (it == postings_.end()) return out;
    out.reserve(it->second.size());
    for (const auto& p : it->second) out.emplace_back(doc_ids_[p.doc], p.tf);
    return out;
}

double Bm25Index::term_doc_score(const std::string& term, uint32_t ord) const {
    auto it = postings_.find(term);
    if (it == postings_.end()) return 0.0;
    const auto& plist = it->second;
    auto pit = std::lower_bound(plist.begin(), plist.end(), ord,
                                [](const Posting& p, uint32_t o) { return p.doc < o; });
    if (pit == plist.end() || pit->doc != ord) return 0.0;

    const double idf = bm25_idf(doc_ids_.size(), plist.size());
    const double tf = pit->tf;
    const double len_norm =
        1.0 - params_.b + params_.b * (static_cast<double>(doc_lens_[ord]) / avg_doc_len_);
    return idf * (tf * (params_.k1 + 1.0)) / (tf + params_.k1 * len_norm);
}

double Bm25Index::score(const std::vector<std::string>& query_tokens,
                        const std::string& chunk_id) const {
    const auto ord = static_cast<uint32_t>(ordinal_of(chunk_id));
    double total = 0.0;
    for (const auto& term : query_tokens) total += term_doc_score(term, ord);
    return total;
}

std::vector<RankedPassage> Bm25Index::retrieve(const std::vector<std::string>& query_tokens,
                                               std::size_t n) const {
    if (n == 0) throw std::invalid_argument("bm25: n must be >= 1");
    if (query_tokens.empty()) return {};

    std::vector<double> acc(doc_ids_.size(), 0.0);
    for (const auto& term : query_tokens) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& plist = it->second;
        const double idf = bm25_idf(doc_ids_.size(), plist.size());
        for (const auto& p : plist) {
            const double tf = p.tf;
            const double len_norm =
                1.0 - params_.b +
                params_.b * (static_cast<double>(doc_lens_[p.doc]) / avg_doc_len_);
            acc[p.doc] += idf * (tf * (params_.k1 + 1.0)) / (tf + params_.k1 * len_norm);
        }
    }

    std::vector<uint32_t> hits;
    for (uint32_t i = 0; i < acc.size(); ++i) {
        if (acc[i] > 0.0) hits.push_back(i);
    }
    // Sort by score descending; ordinal order is chunk-id order, which gives
    // the ascending-id tie break.
    std::stable_sort(hits.begin(), hits.end(),
                     [&](uint32_t a, uint32_t b) { return acc[a] > acc[b]; });
    if (hits.size() > n) hits.resize(n);

    std::vector<RankedPassage> out;
    out.reserve(hits.size());
    for (uint32_t ord : hits) out.push_back({doc_ids_[ord], acc[ord], Stage::Sparse});
    return out;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kIndexMagic = "bahith-bm25 1";

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string Bm25Index::to_string() const {
    std::string out;
    out += kIndexMagic;
    out += " k1=";
    out += fmt_double(params_.k1);
    out += " b=";
    out += fmt_double(params_.b);
    out += " docs=";
    out += std::to_string(doc_ids_.size());
    out += " avg_doc_len=";
    out += fmt_double(avg_doc_len_);
    out += '\n';
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        out += "D ";
        out += doc_ids_[i];
        out += ' ';
        out += std::to_string(doc_lens_[i]);
        out += '\n';
    }
    for (const auto& [term, plist] : postings_) {
        out += "P ";
        out += term;
        for (const auto& p : plist) {
            out += ' ';
            out += std::to_string(p.doc);
            out += ':';
            out += std::to_string(p.tf);
        }
        out += '\n';
    }
    return out;
}

Bm25Index Bm25Index::from_string(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line.rfind(kIndexMagic, 0) != 0) {
        throw std::runtime_error("bm25 store: bad or unsupported header");
    }

    Bm25Index index;
    {
        std::istringstream hdr(line.substr(std::string(kIndexMagic).size()));
        std::string field;
        std::size_t promised_docs = 0;
        double avg = 0.0;
        while (hdr >> field) {
            auto eq = field.find('=');
            if (eq == std::string::npos) throw std::runtime_error("bm25 store: bad header field");
            const std::string key = field.substr(0, eq);
            const std::string val = field.substr(eq + 1);
            if (key == "k1")
                index.params_.k1 = std::stod(val);
            else if (key == "b")
                index.params_.b = std::stod(val);
            else if (key == "docs")
                promised_docs = std::stoul(val);
            else if (key == "avg_doc_len")
                avg = std::stod(val);
        }
        index.avg_doc_len_ = avg;
        index.doc_ids_.reserve(promised_docs);
    }

    uint64_t total_len = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == 'D') {
            std::istringstream ls(line.substr(2));
            std::string id;
            uint32_t len = 0;
            if (!(ls >> id >> len)) throw std::runtime_error("bm25 store: corrupt doc line");
            if (!index.doc_ids_.empty() && !(index.doc_ids_.back() < id)) {
                throw std::runtime_error("bm25 store: doc ids out of order");
            }
            index.doc_ids_.push_back(id);
            index.doc_lens_.push_back(len);
            total_len += len;
        } else if (line[0] == 'P') {
            std::istringstream ls(line.substr(2));
            std::string term;
            if (!(ls >> term)) throw std::runtime_error("bm25 store: corrupt posting line");
            auto& plist = index.postings_[term];
            std::string cell;
            while (ls >> cell) {
                auto colon = cell.find(':');
                if (colon == std::string::npos) {
                    throw std::runtime_error("bm25 store: corrupt posting cell '" + cell + "'");
                }
                Posting p;
                p.doc = static_cast<uint32_t>(std::stoul(cell.substr(0, colon)));
                p.tf = static_cast<uint32_t>(std::stoul(cell.substr(colon + 1)));
                if (p.doc >= index.doc_ids_.size() || p.tf == 0 ||
                    (!plist.empty() && plist.back().doc >= p.doc)) {
                    throw std::runtime_error("bm25 store: corrupt posting for term '" + term +
                                             "'");
                }
                plist.push_back(p);
            }
        } else {
            throw std::runtime_error("bm25 store: unknown record '" + line.substr(0, 1) + "'");
        }
    }
    if (index.doc_ids_.empty() || total_len == 0) {
        throw std::runtime_error("bm25 store: empty index");
    }
    const double expect_avg =
        static_cast<double>(total_len) / static_cast<double>(index.doc_ids_.size());
    if (std::abs(expect_avg - index.avg_doc_len_) > 1e-9 * (1.0 + expect_avg)) {
        throw std::runtime_error("bm25 store: avg_doc_len disagrees with doc lengths");
    }
    index.params_.validate();
    return index;
}

void Bm25Index::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write bm25 store: " + path);
    const std::string text = to_string();
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for bm25 store: " + path);
}

Bm25Index Bm25Index::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open bm25 store: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

}  // namespace bahith::sparse
