#pragma once

// Helpers for integration tests that drive the installed CLI binary.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"

namespace bahith::test {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

class CliWorkspace {
public:
    explicit CliWorkspace(const std::string& name) {
        dir_ = fs::temp_directory_path() / ("bahith_" + name);
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    const fs::path& dir() const { return dir_; }
    std::string path(const std::string& rel) const { return (dir_ / rel).string(); }

    void write(const std::string& rel, const std::string& content) const {
        std::ofstream out(dir_ / rel, std::ios::binary | std::ios::trunc);
        out << content;
    }

    std::string read(const std::string& rel) const {
        std::ifstream in(dir_ / rel, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    CliResult run(const std::string& args) const {
        const std::string log = (dir_ / "last_cmd.log").string();
        const std::string cmd =
            std::string(BAHITH_CLI_PATH) + " " + args + " > " + log + " 2>&1";
        const int status = std::system(cmd.c_str());
        CliResult res;
        res.exit_code = WEXITSTATUS(status);
        std::ifstream in(log, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        res.output = ss.str();
        return res;
    }

private:
    fs::path dir_;
};

inline std::string fatwas_jsonl(const std::vector<corpus::FatwaRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::json meta = nlohmann::json::object();
        for (const auto& [k, v] : r.metadata) meta[k] = v;
        out += nlohmann::json{{"category", r.category},
                              {"question", r.question},
                              {"answer", r.answer},
                              {"metadata", meta}}
                   .dump();
        out += "\n";
    }
    return out;
}

inline std::string dataset_jsonl(const std::vector<rag::McqItem>& items) {
    std::string out;
    for (const auto& item : items) {
        nlohmann::json options = nlohmann::json::object();
        for (const auto& [letter, text] : item.options) {
            options[std::string(1, letter)] = text;
        }
        nlohmann::json j{{"id", item.id},
                         {"question", item.question},
                         {"options", options}};
        if (item.gold) j["answer"] = std::string(1, *item.gold);
        if (item.difficulty != rag::Difficulty::Unspecified) {
            j["level"] = rag::to_string(item.difficulty);
        }
        out += j.dump();
        out += "\n";
    }
    return out;
}

}  // namespace bahith::test
