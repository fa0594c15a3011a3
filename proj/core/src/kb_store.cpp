#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bahith/corpus.hpp"

namespace bahith::corpus {

namespace {

using nlohmann::json;

constexpr const char* kKbFormat = "bahith-kb";
constexpr int kKbVersion = 1;

json chunk_config_to_json(const ChunkConfig& cfg) {
    return json{{"target_tokens", cfg.target_tokens},
                {"overlap_tokens", cfg.overlap_tokens},
                {"min_tokens", cfg.min_tokens},
                {"max_tokens", cfg.max_tokens}};
}

ChunkConfig chunk_config_from_json(const json& j) {
    ChunkConfig cfg;
    cfg.target_tokens = j.at("target_tokens").get<uint32_t>();
    cfg.overlap_tokens = j.at("overlap_tokens").get<uint32_t>();
    cfg.min_tokens = j.at("min_tokens").get<uint32_t>();
    cfg.max_tokens = j.at("max_tokens").get<uint32_t>();
    return cfg;
}

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(std::string("cannot open ") + what + ": " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content, const char* what) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(std::string("cannot write ") + what + ": " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error(std::string("write failed for ") + what + ": " + path);
}

}  // namespace

std::string kb_to_string(const Kb& kb) {
    std::string out;
    json header{{"format", kKbFormat},
                {"version", kKbVersion},
                {"chunk_config", chunk_config_to_json(kb.chunk_config())},
                {"chunks", kb.size()}};
    out += header.dump();
    out += '\n';
    for (const auto& c : kb.chunks()) {
        json rec{{"id", c.id},          {"source_id", c.source_id},
                 {"seq", c.seq},        {"original", c.original},
                 {"light", c.light},    {"full", c.full},
                 {"token_count", c.token_count}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

Kb kb_from_string(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("kb store: empty file");

    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("kb store: bad header: ") + e.what());
    }
    if (header.value("format", "") != kKbFormat) {
        throw std::runtime_error("kb store: not a knowledge-base store (format '" +
                                 header.value("format", "") + "')");
    }
    const int version = header.value("version", -1);
    if (version != kKbVersion) {
        throw std::runtime_error("kb store: unsupported version " + std::to_string(version) +
                                 " (expected " + std::to_string(kKbVersion) + ")");
    }
    ChunkConfig cfg = chunk_config_from_json(header.at("chunk_config"));

    std::vector<Chunk> chunks;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
            Chunk c;
            c.id = rec.at("id").get<std::string>();
            c.source_id = rec.at("source_id").get<std::string>();
            c.seq = rec.at("seq").get<uint32_t>();
            c.original = rec.at("original").get<std::string>();
            c.light = rec.at("light").get<std::string>();
            c.full = rec.at("full").get<std::vector<std::string>>();
            c.token_count = rec.at("token_count").get<uint32_t>();
            chunks.push_back(std::move(c));
        } catch (const json::exception& e) {
            throw std::runtime_error("kb store: corrupt record at line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
    }
    if (header.contains("chunks") && header.at("chunks").get<std::size_t>() != chunks.size()) {
        throw std::runtime_error("kb store: truncated store (header promises " +
                                 header.at("chunks").dump() + " chunks, found " +
                                 std::to_string(chunks.size()) + ")");
    }
    return Kb(std::move(chunks), cfg);
}

void save_kb(const Kb& kb, const std::string& path) {
    write_file(path, kb_to_string(kb), "kb store");
}

Kb load_kb(const std::string& path) {
    return kb_from_string(read_file(path, "kb store"));
}

std::vector<FatwaRecord> parse_fatwa_jsonl(std::string_view text) {
    std::vector<FatwaRecord> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t line_offset = offset;
        offset += line.size() + 1;
        if (line.empty()) continue;
        try {
            json rec = json::parse(line);
            FatwaRecord r;
            r.category = rec.value("category", "");
            r.question = rec.at("question").get<std::string>();
            r.answer = rec.at("answer").get<std::string>();
            if (rec.contains("metadata")) {
                r.metadata = rec.at("metadata").get<std::map<std::string, std::string>>();
            }
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError("fatwa record at line " + std::to_string(line_no) + ": " + e.what(),
                             line_offset);
        }
    }
    return out;
}

std::vector<FatwaRecord> load_fatwa_jsonl(const std::string& path) {
    return parse_fatwa_jsonl(read_file(path, "fatwa file"));
}

}  // namespace bahith::corpus
